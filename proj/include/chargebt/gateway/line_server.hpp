#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "chargebt/gateway/hub.hpp"

namespace chargebt::gateway {

class BindFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "host:port" or ":port"; an empty host means 127.0.0.1.
std::pair<std::string, std::uint16_t> parse_address(const std::string& addr);

// JSON-lines over TCP: every connection gets the event stream and may send
// one command per line.
class LineServer {
 public:
  using CommandSink = std::function<void(const nlohmann::json&)>;

  LineServer(Hub& hub, CommandSink on_command) : hub_(hub), on_command_(std::move(on_command)) {}
  ~LineServer();
  LineServer(const LineServer&) = delete;
  LineServer& operator=(const LineServer&) = delete;

  // Throws BindFailure. Port 0 picks a free port.
  void start(const std::string& host, std::uint16_t port);
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  struct Connection {
    int fd = -1;
    std::shared_ptr<Subscriber> subscriber;
    std::thread reader;
    std::thread writer;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void read_loop(Connection& c);
  void write_loop(Connection& c);
  void reap(bool all);

  Hub& hub_;
  CommandSink on_command_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex connections_mutex_;
  std::list<std::unique_ptr<Connection>> connections_;
};

}  // namespace chargebt::gateway
