#include "chargebt/gateway/http_server.hpp"

#include <httplib.h>

#include "chargebt/gateway/line_server.hpp"

namespace chargebt::gateway {

using nlohmann::json;

HttpServer::HttpServer(Hub& hub, CommandSink on_command, json trees, std::string static_dir)
    : hub_(hub),
      on_command_(std::move(on_command)),
      trees_(std::move(trees)),
      static_dir_(std::move(static_dir)),
      server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  srv.Get("/api/state", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(hub_.state().dump(), "application/json");
  });
  srv.Get("/api/trees", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(trees_.dump(), "application/json");
  });
  srv.Post("/api/commands", [this](const httplib::Request& req, httplib::Response& res) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      res.status = 400;
      res.set_content(json{{"error", "body must be a JSON object"}}.dump(), "application/json");
      return;
    }
    on_command_(j);
    res.status = 202;
    res.set_content(json{{"queued", j.value("command_id", std::string())}}.dump(), "application/json");
  });
  srv.Get("/api/events", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = hub_.subscribe();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub, idle = 0](std::size_t, httplib::DataSink& sink) mutable {
          auto e = sub->pop(std::chrono::milliseconds(200));
          if (!e) {
            if (sub->closed()) {
              sink.done();
              return false;
            }
            // Comment line every few seconds so proxies keep the stream open.
            if (++idle >= 25) {
              idle = 0;
              const std::string ping = ": ping\n\n";
              return sink.write(ping.data(), ping.size());
            }
            return true;
          }
          idle = 0;
          const std::string frame = "id: " + std::to_string((*e)->seq) + "\nevent: " + (*e)->kind +
                                    "\ndata: " + (*e)->to_json().dump() + "\n\n";
          return sink.write(frame.data(), frame.size());
        },
        [sub](bool) { sub->close(); });
  });
  if (!static_dir_.empty()) srv.set_mount_point("/", static_dir_);
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::start(const std::string& host, std::uint16_t port) {
  if (port == 0) {
    const int p = server_->bind_to_any_port(host);
    if (p <= 0) throw BindFailure("cannot listen on " + host);
    port_ = static_cast<std::uint16_t>(p);
  } else {
    if (!server_->bind_to_port(host, port)) throw BindFailure("cannot listen on " + host + ":" + std::to_string(port));
    port_ = port;
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
}

void HttpServer::stop() {
  if (!thread_.joinable()) return;
  hub_.close_all();
  server_->stop();
  thread_.join();
}

}  // namespace chargebt::gateway
