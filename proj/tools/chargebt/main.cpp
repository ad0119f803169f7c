// chargebt: mission service, headless runner and tree tooling.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "chargebt/dsl/document.hpp"
#include "chargebt/dsl/validate.hpp"
#include "chargebt/fsm/phase.hpp"
#include "chargebt/gateway/codec.hpp"
#include "chargebt/gateway/headless.hpp"
#include "chargebt/gateway/http_server.hpp"
#include "chargebt/gateway/hub.hpp"
#include "chargebt/gateway/line_server.hpp"
#include "chargebt/gateway/session.hpp"
#include "chargebt/mission/mission.hpp"
#include "chargebt/mission/trees.hpp"
#include "chargebt/sim/scenario.hpp"

namespace fs = std::filesystem;
namespace gw = chargebt::gateway;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStartup = 2;
constexpr int kExitRuntime = 3;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

struct ServeOptions {
  std::string scenario;
  std::string trees;
  std::string listen;
  std::string http;
  std::string static_dir;
  double tick_rate = 100.0;
  std::optional<std::uint64_t> seed;
  std::string snapshot_dir;
  std::uint64_t snapshot_every = 100;
  std::string headless;
  std::string resume;
  std::string events_out;
  std::string report_out;
  std::optional<std::uint64_t> crash_at_tick;
  std::uint64_t max_ticks = 2'000'000;
  bool quiet = false;
};

chargebt::dsl::TreeDocument load_trees(const std::string& path) {
  if (path.empty()) return chargebt::mission::build_mission_trees();
  if (fs::is_directory(path)) return chargebt::dsl::load_directory(path);
  return chargebt::dsl::parse_file(path);
}

json trees_json(const chargebt::dsl::TreeDocument& doc) {
  json trees = json::array();
  for (chargebt::fsm::Phase p : chargebt::fsm::kAllPhases) {
    const auto name = chargebt::fsm::phase_tree(p);
    if (!name) continue;
    if (const auto* def = doc.find_tree(*name)) {
      trees.push_back({{"phase", chargebt::fsm::to_string(p)}, {"name", def->name}, {"root", gw::tree_to_json(def->root)}});
    }
  }
  return {{"v", gw::kProtocolVersion}, {"trees", trees}};
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

int serve(const ServeOptions& o) {
  std::unique_ptr<gw::Session> session;
  std::vector<gw::ScriptStep> script;
  std::ofstream events;
  try {
    if (o.scenario.empty()) throw std::invalid_argument("--scenario is required");
    gw::SessionConfig cfg;
    cfg.scenario = chargebt::sim::load_scenario(o.scenario);
    if (o.seed) cfg.scenario.seed = *o.seed;
    cfg.scenario_path = o.scenario;
    cfg.trees = load_trees(o.trees);
    cfg.snapshot_dir = o.snapshot_dir;
    cfg.snapshot_every = o.snapshot_every;
    session = std::make_unique<gw::Session>(std::move(cfg));
    if (!o.headless.empty()) script = gw::load_script(o.headless);
    if (!o.events_out.empty()) {
      events.open(o.events_out, std::ios::trunc);
      if (!events) throw std::runtime_error("cannot write " + o.events_out);
    }
    if (!o.resume.empty()) session->load_snapshot(o.resume);
  } catch (const std::exception& e) {
    std::cerr << "chargebt: " << e.what() << "\n";
    return kExitStartup;
  }

  gw::Hub hub;
  session->set_sink([&](const gw::EventMsg& m) {
    if (events.is_open()) events << m.to_json().dump() << "\n";
    hub.publish(m);
  });
  auto submit = [&](const json& j) { session->submit_json(j); };

  std::unique_ptr<gw::LineServer> line;
  std::unique_ptr<gw::HttpServer> http;
  try {
    if (!o.listen.empty()) {
      const auto [host, port] = gw::parse_address(o.listen);
      line = std::make_unique<gw::LineServer>(hub, submit);
      line->start(host, port);
      if (!o.quiet) std::cerr << "chargebt: JSON lines on " << host << ":" << line->port() << "\n";
    }
    if (!o.http.empty()) {
      const auto [host, port] = gw::parse_address(o.http);
      http = std::make_unique<gw::HttpServer>(hub, submit, trees_json(session->trees()), o.static_dir);
      http->start(host, port);
      if (!o.quiet) std::cerr << "chargebt: HTTP on " << host << ":" << http->port() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "chargebt: " << e.what() << "\n";
    return kExitStartup;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  int code = kExitOk;
  try {
    session->write_initial_snapshot();
    if (!o.headless.empty()) {
      gw::HeadlessOptions ho;
      ho.max_ticks = o.max_ticks;
      ho.crash_at_tick = o.crash_at_tick;
      const auto end = gw::run_headless(*session, script, ho);
      if (end == gw::HeadlessEnd::kTickLimit) {
        std::cerr << "chargebt: tick limit reached in " << chargebt::fsm::to_string(session->orchestrator().phase())
                  << "\n";
        code = kExitRuntime;
      }
    } else {
      using clock = std::chrono::steady_clock;
      const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(1.0 / o.tick_rate));
      auto next = clock::now();
      while (!session->stopped() && !g_interrupted) {
        hub.admit([&] {
          return gw::EventMsg{std::string(gw::events::kResyncState), session->last_seq(), session->sim_time(),
                              session->state_json()};
        });
        session->tick_once();
        if (o.crash_at_tick && session->sim_time() >= *o.crash_at_tick) std::_Exit(137);
        hub.set_state(session->state_json());
        next += period;
        std::this_thread::sleep_until(next);
        if (clock::now() > next + 10 * period) next = clock::now();
      }
    }
    if (!o.report_out.empty()) write_json_file(o.report_out, session->report());
  } catch (const std::exception& e) {
    std::cerr << "chargebt: runtime error: " << e.what() << "\n";
    code = kExitRuntime;
  }
  if (http) http->stop();
  if (line) line->stop();
  hub.close_all();
  return code;
}

int validate(const std::vector<std::string>& paths, bool quiet) {
  int worst = 0;
  for (const auto& path : paths) {
    try {
      const auto doc = load_trees(path);
      const auto diagnostics = chargebt::dsl::validate(doc);
      for (const auto& d : diagnostics) std::cout << path << ":" << d << "\n";
      const int code = chargebt::dsl::exit_code(diagnostics);
      if (!quiet && code == 0) std::cout << path << ": ok\n";
      worst = std::max(worst, code);
    } catch (const chargebt::dsl::ParseError& e) {
      std::cout << path << ":" << e.what() << "\n";
      worst = 2;
    } catch (const std::exception& e) {
      std::cout << path << ": " << e.what() << "\n";
      worst = 2;
    }
  }
  return worst;
}

int plan(const std::string& scenario_path) {
  try {
    const auto scenario = chargebt::sim::load_scenario(scenario_path);
    chargebt::mission::MissionStore store;
    for (const auto& t : scenario.holes) {
      chargebt::mission::ChargeHole h;
      h.id = t.id;
      h.x = t.x;
      h.y = t.y;
      h.depth = t.depth;
      h.collar_direction = t.collar_direction;
      store.add(h);
    }
    store.plan(scenario.plan, "cli");
    std::cout << chargebt::mission::mission_to_json(store).dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "chargebt: " << e.what() << "\n";
    return kExitStartup;
  }
}

int trees(const std::vector<std::string>& names, const std::string& out) {
  try {
    auto doc = chargebt::mission::build_mission_trees();
    if (!names.empty()) doc = chargebt::mission::extract_trees(doc, names);
    const std::string text = chargebt::dsl::serialize(doc);
    if (out.empty() || out == "-") {
      std::cout << text;
    } else {
      std::ofstream f(out, std::ios::trunc);
      if (!f) throw std::runtime_error("cannot write " + out);
      f << text;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "chargebt: " << e.what() << "\n";
    return kExitStartup;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chargebt: behavior-tree charging mission service"};
  app.set_version_flag("--version", "chargebt 0.1.0");
  app.require_subcommand(0, 1);

  ServeOptions o;
  std::uint64_t seed = 0;
  std::uint64_t crash_at = 0;
  app.add_option("--scenario", o.scenario, "Scenario JSON file")->envname("CHARGEBT_SCENARIO");
  app.add_option("--trees", o.trees, "Tree file or directory of *.tree.xml (default: built-in trees)")
      ->envname("CHARGEBT_TREES");
  app.add_option("--listen", o.listen, "JSON-lines TCP endpoint, host:port")->envname("CHARGEBT_LISTEN");
  app.add_option("--http", o.http, "HTTP endpoint for SSE, commands and static files, host:port")
      ->envname("CHARGEBT_HTTP");
  app.add_option("--static-dir", o.static_dir, "Directory served at / by the HTTP endpoint")
      ->envname("CHARGEBT_STATIC_DIR");
  app.add_option("--tick-rate", o.tick_rate, "Ticks per second when serving")
      ->envname("CHARGEBT_TICK_RATE")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed")->envname("CHARGEBT_SEED");
  app.add_option("--snapshot-dir", o.snapshot_dir, "Where snapshots are written")->envname("CHARGEBT_SNAPSHOT_DIR");
  app.add_option("--snapshot-every", o.snapshot_every, "Ticks between periodic snapshots (0: off)")
      ->envname("CHARGEBT_SNAPSHOT_EVERY");
  app.add_option("--headless", o.headless, "Replay a command script as fast as possible, then exit")
      ->envname("CHARGEBT_HEADLESS");
  app.add_option("--resume", o.resume, "Snapshot to resume from ('latest' or a file)")->envname("CHARGEBT_RESUME");
  app.add_option("--events-out", o.events_out, "Write every event as a JSON line")->envname("CHARGEBT_EVENTS_OUT");
  app.add_option("--report-out", o.report_out, "Write the final report as JSON")->envname("CHARGEBT_REPORT_OUT");
  app.add_option("--max-ticks", o.max_ticks, "Headless tick budget")->envname("CHARGEBT_MAX_TICKS");
  auto* crash_opt = app.add_option("--crash-at-tick", crash_at, "Exit abruptly at this tick (fault testing)")
                        ->envname("CHARGEBT_CRASH_AT_TICK");
  app.add_flag("-q,--quiet", o.quiet, "Less output on stderr");

  auto* validate_cmd = app.add_subcommand("validate", "Lint tree files; exit 0 clean, 1 warnings, 2 errors");
  std::vector<std::string> validate_paths;
  validate_cmd->add_option("paths", validate_paths, "Tree files or directories")->required();

  auto* plan_cmd = app.add_subcommand("plan", "Print the charging plan for a scenario's true holes");
  std::string plan_scenario;
  plan_cmd->add_option("scenario", plan_scenario, "Scenario JSON file")->required();

  auto* trees_cmd = app.add_subcommand("trees", "Write the built-in mission trees as XML");
  std::vector<std::string> tree_names;
  std::string trees_out;
  trees_cmd->add_option("--tree", tree_names, "Only these trees (repeatable)");
  trees_cmd->add_option("-o,--out", trees_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitStartup;
  }
  if (*seed_opt) o.seed = seed;
  if (*crash_opt) o.crash_at_tick = crash_at;

  if (*validate_cmd) return validate(validate_paths, o.quiet);
  if (*plan_cmd) return plan(plan_scenario);
  if (*trees_cmd) return trees(tree_names, trees_out);
  return serve(o);
}
