#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "chargebt/gateway/codec.hpp"
#include "chargebt/gateway/http_server.hpp"
#include "chargebt/gateway/hub.hpp"
#include "chargebt/gateway/line_server.hpp"
#include "chargebt/gateway/session.hpp"
#include "chargebt/mission/trees.hpp"
#include "chargebt/sim/scenario.hpp"

using namespace chargebt;
using namespace std::chrono_literals;
using nlohmann::json;
namespace gw = chargebt::gateway;
namespace fs = std::filesystem;

namespace {

// Session, hub and both servers with a tick thread, wired the way the CLI does it.
struct Service {
  explicit Service(std::string static_dir = {}) {
    gw::SessionConfig cfg;
    cfg.scenario = sim::load_scenario(std::string(CHARGEBT_ASSETS_DIR) + "/scenarios/demo.json");
    cfg.trees = mission::build_mission_trees();
    cfg.snapshot_every = 0;
    session = std::make_unique<gw::Session>(std::move(cfg));
    session->set_sink([this](const gw::EventMsg& m) { hub.publish(m); });
    hub.set_state(session->state_json());
    auto submit = [this](const json& j) { session->submit_json(j); };
    line = std::make_unique<gw::LineServer>(hub, submit);
    line->start("127.0.0.1", 0);
    json trees = json::object();
    for (const auto& t : session->trees().trees) trees[t.name] = gw::tree_to_json(t.root);
    http = std::make_unique<gw::HttpServer>(hub, submit, trees, std::move(static_dir));
    http->start("127.0.0.1", 0);
    ticker = std::thread([this] {
      while (!quit) {
        hub.admit([this] {
          return gw::EventMsg{std::string(gw::events::kResyncState), session->last_seq(), session->sim_time(),
                              session->state_json()};
        });
        session->tick_once();
        hub.set_state(session->state_json());
        std::this_thread::sleep_for(1ms);
      }
    });
  }

  ~Service() {
    quit = true;
    ticker.join();
    http->stop();
    line->stop();
    hub.close_all();
  }

  gw::Hub hub;
  std::unique_ptr<gw::Session> session;
  std::unique_ptr<gw::LineServer> line;
  std::unique_ptr<gw::HttpServer> http;
  std::atomic<bool> quit{false};
  std::thread ticker;
};

class LineClient {
 public:
  explicit LineClient(std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) throw std::runtime_error("connect");
    timeval tv{5, 0};
    ::setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  }
  ~LineClient() { ::close(fd_); }

  void send(const std::string& line) {
    const std::string data = line + "\n";
    ASSERT_EQ(::send(fd_, data.data(), data.size(), MSG_NOSIGNAL), static_cast<ssize_t>(data.size()));
  }

  // Empty on timeout or close.
  std::string read_line() {
    while (true) {
      const auto nl = buf_.find('\n');
      if (nl != std::string::npos) {
        std::string out = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return out;
      }
      char chunk[4096];
      const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) return {};
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Reads events until `pred` matches; every event is appended to `seen`.
  std::optional<json> read_until(const std::function<bool(const json&)>& pred, std::vector<json>& seen) {
    const auto deadline = std::chrono::steady_clock::now() + 10s;
    while (std::chrono::steady_clock::now() < deadline) {
      const std::string line = read_line();
      if (line.empty()) return std::nullopt;
      json j = json::parse(line);
      seen.push_back(j);
      if (pred(j)) return j;
    }
    return std::nullopt;
  }

 private:
  int fd_ = -1;
  std::string buf_;
};

bool is_ack(const json& j, const json& id) {
  return j["kind"] == "CommandAck" && j["payload"]["command_id"] == id;
}

}  // namespace

TEST(Hub, SlowSubscriberIsClosedNotWaitedOn) {
  gw::Hub hub(3);
  auto slow = hub.subscribe();
  auto fast = hub.subscribe();
  hub.admit([] { return gw::EventMsg{"ResyncState", 0, 0, json::object()}; });
  EXPECT_EQ(hub.live_count(), 2u);
  for (std::uint64_t i = 1; i <= 2; ++i) {
    hub.publish(gw::EventMsg{"Heartbeat", i, i, json::object()});
    ASSERT_TRUE(fast->pop(0ms).has_value());
  }
  // slow holds Resync + 2; one more overflows it.
  hub.publish(gw::EventMsg{"Heartbeat", 3, 3, json::object()});
  EXPECT_TRUE(slow->closed());
  EXPECT_TRUE(slow->overflowed());
  EXPECT_FALSE(fast->closed());
  EXPECT_EQ(hub.live_count(), 1u);
}

TEST(Hub, NewSubscriberStartsWithResync) {
  gw::Hub hub;
  hub.admit([] { return gw::EventMsg{"ResyncState", 0, 0, json::object()}; });
  hub.publish(gw::EventMsg{"Heartbeat", 1, 1, json::object()});
  auto s = hub.subscribe();
  EXPECT_TRUE(hub.has_pending());
  hub.publish(gw::EventMsg{"Heartbeat", 2, 2, json::object()});
  EXPECT_FALSE(s->pop(0ms).has_value());
  hub.admit([] { return gw::EventMsg{"ResyncState", 2, 2, json::object()}; });
  hub.publish(gw::EventMsg{"Heartbeat", 3, 3, json::object()});
  EXPECT_EQ((*s->pop(0ms))->kind, "ResyncState");
  EXPECT_EQ((*s->pop(0ms))->seq, 3u);
}

TEST(Address, Parsing) {
  EXPECT_EQ(gw::parse_address(":7000"), (std::pair<std::string, std::uint16_t>{"127.0.0.1", 7000}));
  EXPECT_EQ(gw::parse_address("0.0.0.0:80"), (std::pair<std::string, std::uint16_t>{"0.0.0.0", 80}));
  EXPECT_THROW(gw::parse_address("nohost"), std::exception);
  EXPECT_THROW(gw::parse_address(":99999"), std::exception);
}

TEST(LineProtocol, ResyncThenAckedCommandsThenPhaseChanges) {
  Service svc;
  LineClient a(svc.line->port());
  std::vector<json> seen;
  const std::string first = a.read_line();
  ASSERT_FALSE(first.empty());
  EXPECT_EQ(json::parse(first)["kind"], "ResyncState");
  EXPECT_EQ(json::parse(first)["payload"]["phase"], "Idle");

  a.send(R"({"v":1,"kind":"StartMission","command_id":"c1","issued_by":"wire"})");
  const auto ack = a.read_until([](const json& j) { return is_ack(j, "c1"); }, seen);
  ASSERT_TRUE(ack.has_value());
  EXPECT_EQ((*ack)["payload"]["result"], "Accepted");
  const auto changed = a.read_until([](const json& j) { return j["kind"] == "PhaseChanged"; }, seen);
  ASSERT_TRUE(changed.has_value());
  EXPECT_EQ((*changed)["payload"]["from"], "Idle");
  EXPECT_EQ((*changed)["payload"]["to"], "PreScan");
  EXPECT_EQ((*changed)["payload"]["via"], "StartMission");

  a.send("this is not json");
  const auto bad = a.read_until(
      [](const json& j) { return j["kind"] == "CommandAck" && j["payload"]["result"] == "Rejected"; }, seen);
  ASSERT_TRUE(bad.has_value());
  EXPECT_TRUE((*bad)["payload"]["command_id"].is_null());

  a.send(R"({"kind":"Resume","command_id":"c2","issued_by":"wire"})");
  const auto rejected = a.read_until([](const json& j) { return is_ack(j, "c2"); }, seen);
  ASSERT_TRUE(rejected.has_value());
  EXPECT_EQ((*rejected)["payload"]["result"], "Rejected");

  // Run to the plan; the phase walk arrives in order.
  auto to_plan = [](const json& j) { return j["kind"] == "PhaseChanged" && j["payload"]["to"] == "ChargePlan"; };
  if (std::none_of(seen.begin(), seen.end(), to_plan)) ASSERT_TRUE(a.read_until(to_plan, seen).has_value());
  std::vector<std::string> walk;
  for (const auto& j : seen) {
    if (j["kind"] == "PhaseChanged") walk.push_back(j["payload"]["to"]);
  }
  EXPECT_EQ(walk, (std::vector<std::string>{"PreScan", "DetectHoles", "ChargePlan"}));

  std::uint64_t last = json::parse(first)["seq"];
  for (const auto& j : seen) {
    ASSERT_GT(j["seq"].get<std::uint64_t>(), last);
    last = j["seq"];
    ASSERT_EQ(j["v"], 1);
  }
}

TEST(LineProtocol, EveryClientSeesTheSameAck) {
  Service svc;
  LineClient a(svc.line->port());
  LineClient b(svc.line->port());
  ASSERT_FALSE(a.read_line().empty());
  ASSERT_FALSE(b.read_line().empty());
  a.send(R"({"kind":"Pause","command_id":"p","issued_by":"a"})");
  std::vector<json> seen_a;
  std::vector<json> seen_b;
  const auto ack_a = a.read_until([](const json& j) { return is_ack(j, "p"); }, seen_a);
  const auto ack_b = b.read_until([](const json& j) { return is_ack(j, "p"); }, seen_b);
  ASSERT_TRUE(ack_a && ack_b);
  EXPECT_EQ(*ack_a, *ack_b);
  EXPECT_EQ((*ack_a)["payload"]["result"], "Rejected");
}

TEST(Http, StateTreesCommandsAndStatic) {
  const fs::path web = fs::temp_directory_path() / "chargebt-wire-static";
  fs::create_directories(web);
  std::ofstream(web / "index.html") << "<!doctype html><title>console</title>\n";
  Service svc(web.string());
  httplib::Client cli("127.0.0.1", svc.http->port());
  cli.set_read_timeout(5, 0);

  auto state = cli.Get("/api/state");
  ASSERT_TRUE(state);
  EXPECT_EQ(state->status, 200);
  EXPECT_EQ(json::parse(state->body)["phase"], "Idle");

  auto trees = cli.Get("/api/trees");
  ASSERT_TRUE(trees);
  const json t = json::parse(trees->body);
  for (const char* name : {"PreScan", "DetectHoles", "ChargePlan", "Charging"}) EXPECT_TRUE(t.contains(name)) << name;
  EXPECT_EQ(t["Charging"]["kind"], "Parallel");
  EXPECT_EQ(t["Charging"]["children"].size(), 2u);

  auto bad = cli.Post("/api/commands", "[1,2]", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto ok = cli.Post("/api/commands", R"({"kind":"StartMission","command_id":"h1","issued_by":"http"})",
                     "application/json");
  ASSERT_TRUE(ok);
  EXPECT_EQ(ok->status, 202);
  EXPECT_EQ(json::parse(ok->body)["queued"], "h1");

  bool moved = false;
  for (int i = 0; i < 500 && !moved; ++i) {
    std::this_thread::sleep_for(5ms);
    moved = json::parse(cli.Get("/api/state")->body)["phase"] != "Idle";
  }
  EXPECT_TRUE(moved);

  auto page = cli.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_NE(page->body.find("console"), std::string::npos);
  EXPECT_EQ(cli.Get("/nope.html")->status, 404);
}

TEST(Http, ServerSentEventsCarryAcks) {
  Service svc;
  std::mutex m;
  std::string stream;
  std::atomic<bool> got_ack{false};
  std::thread reader([&] {
    httplib::Client cli("127.0.0.1", svc.http->port());
    cli.set_read_timeout(10, 0);
    cli.Get("/api/events", [&](const char* data, std::size_t n) {
      std::lock_guard lock(m);
      stream.append(data, n);
      got_ack = stream.find("\"command_id\":\"s1\"") != std::string::npos;
      return !got_ack.load();
    });
  });
  // Wait for the resync frame before sending.
  for (int i = 0; i < 1000; ++i) {
    {
      std::lock_guard lock(m);
      if (stream.find("event: ResyncState") != std::string::npos) break;
    }
    std::this_thread::sleep_for(2ms);
  }
  httplib::Client cli("127.0.0.1", svc.http->port());
  cli.Post("/api/commands", R"({"kind":"StartMission","command_id":"s1","issued_by":"sse"})", "application/json");
  reader.join();
  ASSERT_TRUE(got_ack);

  // Parse the frames: id, event and data lines, blank-line separated.
  std::istringstream in(stream);
  std::string line;
  std::vector<std::pair<std::string, json>> frames;
  std::string event;
  std::uint64_t last_id = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.rfind("id: ", 0) == 0) {
      const auto id = std::stoull(line.substr(4));
      if (!first) EXPECT_GT(id, last_id);
      last_id = id;
      first = false;
    } else if (line.rfind("event: ", 0) == 0) {
      event = line.substr(7);
    } else if (line.rfind("data: ", 0) == 0) {
      frames.emplace_back(event, json::parse(line.substr(6)));
    }
  }
  ASSERT_FALSE(frames.empty());
  EXPECT_EQ(frames.front().first, "ResyncState");
  bool acked = false;
  for (const auto& [kind, data] : frames) {
    EXPECT_EQ(data["kind"], kind);
    if (kind == "CommandAck" && data["payload"]["command_id"] == "s1") {
      acked = true;
      EXPECT_EQ(data["payload"]["result"], "Accepted");
    }
  }
  EXPECT_TRUE(acked);
}
