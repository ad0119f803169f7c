#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "chargebt/gateway/hub.hpp"

namespace httplib {
class Server;
}

namespace chargebt::gateway {

// Browser-facing side of the gateway:
//   GET  /api/events    server-sent events, same payloads as the line protocol
//   POST /api/commands  one command object; acks arrive on the event stream
//   GET  /api/trees     tree structure for every phase
//   GET  /api/state     latest full state
//   GET  /*             static files from static_dir, if set
class HttpServer {
 public:
  using CommandSink = std::function<void(const nlohmann::json&)>;

  HttpServer(Hub& hub, CommandSink on_command, nlohmann::json trees, std::string static_dir);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Throws BindFailure. Port 0 picks a free port.
  void start(const std::string& host, std::uint16_t port);
  void stop();
  std::uint16_t port() const { return port_; }

 private:
  Hub& hub_;
  CommandSink on_command_;
  nlohmann::json trees_;
  std::string static_dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::uint16_t port_ = 0;
};

}  // namespace chargebt::gateway
