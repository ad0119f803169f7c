#include "chargebt/gateway/line_server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace chargebt::gateway {

using nlohmann::json;

std::pair<std::string, std::uint16_t> parse_address(const std::string& addr) {
  const auto colon = addr.rfind(':');
  if (colon == std::string::npos) throw std::invalid_argument("address '" + addr + "' needs host:port");
  std::string host = addr.substr(0, colon);
  if (host.empty()) host = "127.0.0.1";
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(addr.substr(colon + 1), &used);
    if (used != addr.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("address '" + addr + "' has a bad port");
  }
  if (port < 0 || port > 65535) throw std::invalid_argument("address '" + addr + "' has a bad port");
  return {host, static_cast<std::uint16_t>(port)};
}

LineServer::~LineServer() { stop(); }

void LineServer::start(const std::string& host, std::uint16_t port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  if (inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(), &sa.sin_addr) != 1) {
    throw BindFailure("cannot parse listen host '" + host + "'");
  }
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindFailure(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&sa), sizeof sa) != 0 || ::listen(listen_fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw BindFailure("cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof sa;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&sa), &len);
  port_ = ntohs(sa.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void LineServer::stop() {
  if (!running_.exchange(false)) return;
  if (acceptor_.joinable()) acceptor_.join();
  ::close(listen_fd_);
  listen_fd_ = -1;
  reap(true);
}

void LineServer::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) {
      reap(false);
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    auto c = std::make_unique<Connection>();
    c->fd = fd;
    c->subscriber = hub_.subscribe();
    Connection& ref = *c;
    ref.reader = std::thread([this, &ref] { read_loop(ref); });
    ref.writer = std::thread([this, &ref] { write_loop(ref); });
    std::lock_guard lock(connections_mutex_);
    connections_.push_back(std::move(c));
  }
}

void LineServer::read_loop(Connection& c) {
  std::string buffer;
  char chunk[4096];
  while (running_ && !c.subscriber->closed()) {
    pollfd p{c.fd, POLLIN, 0};
    const int ready = ::poll(&p, 1, 100);
    if (ready == 0) continue;
    if (ready < 0) break;
    const ssize_t n = ::recv(c.fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) j = json{{"error", "malformed JSON"}};
      on_command_(j);
    }
  }
  c.subscriber->close();
}

void LineServer::write_loop(Connection& c) {
  while (true) {
    auto e = c.subscriber->pop(std::chrono::milliseconds(100));
    if (!e) {
      if (c.subscriber->closed() || !running_) break;
      continue;
    }
    const std::string line = (*e)->to_json().dump() + "\n";
    std::size_t sent = 0;
    while (sent < line.size()) {
      const ssize_t n = ::send(c.fd, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) {
        c.subscriber->close();
        break;
      }
      sent += static_cast<std::size_t>(n);
    }
    if (sent < line.size()) break;
  }
  c.subscriber->close();
  ::shutdown(c.fd, SHUT_RDWR);
  c.done = true;
}

void LineServer::reap(bool all) {
  std::lock_guard lock(connections_mutex_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    Connection& c = **it;
    if (all) c.subscriber->close();
    if (!all && !c.done) {
      ++it;
      continue;
    }
    if (c.reader.joinable()) c.reader.join();
    if (c.writer.joinable()) c.writer.join();
    ::close(c.fd);
    it = connections_.erase(it);
  }
}

}  // namespace chargebt::gateway
