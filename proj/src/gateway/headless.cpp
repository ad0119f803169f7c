#include "chargebt/gateway/headless.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace chargebt::gateway {

using nlohmann::json;

std::vector<ScriptStep> parse_script(const std::string& text) {
  std::vector<ScriptStep> steps;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ScriptError(e.what(), n);
    }
    if (!j.is_object()) throw ScriptError("expected a JSON object", n);
    ScriptStep step;
    step.line = n;
    if (j.contains("after")) {
      const json& a = j["after"];
      if (!a.is_object()) throw ScriptError("\"after\" must be an object", n);
      if (a.contains("phase")) {
        step.after_phase = fsm::phase_from_string(a["phase"].get<std::string>());
        if (!step.after_phase) throw ScriptError("unknown phase " + a["phase"].dump(), n);
      }
      if (a.contains("tick")) step.after_tick = a["tick"].get<std::uint64_t>();
      step.after_prompt = a.value("prompt", false);
      j.erase("after");
    }
    if (!j.contains("command_id")) j["command_id"] = "script-" + std::to_string(n);
    if (!j.contains("issued_by")) j["issued_by"] = "headless";
    step.command = std::move(j);
    steps.push_back(std::move(step));
  }
  return steps;
}

std::vector<ScriptStep> load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_script(buf.str());
}

namespace {

bool settled(const Session& s, fsm::Phase p) {
  if (s.orchestrator().prompt()) return true;
  if (!fsm::phase_tree(p)) return true;
  return s.last_status(p) == bt::Status::kSuccess;
}

bool ready(const Session& s, const ScriptStep& step) {
  if (step.after_phase && (s.orchestrator().phase() != *step.after_phase || !settled(s, *step.after_phase))) {
    return false;
  }
  if (step.after_tick && s.sim_time() < *step.after_tick) return false;
  if (step.after_prompt && !s.orchestrator().prompt()) return false;
  return true;
}

bool at_rest(const Session& s) {
  const auto& o = s.orchestrator();
  return o.phase() == fsm::Phase::kMissionComplete || o.phase() == fsm::Phase::kIdle || o.paused() ||
         o.prompt().has_value();
}

}  // namespace

HeadlessEnd run_headless(Session& session, const std::vector<ScriptStep>& script, const HeadlessOptions& options) {
  const std::uint64_t start = session.sim_time();
  while (!session.stopped()) {
    bool submitted = false;
    std::size_t cursor = session.headless_cursor();
    while (cursor < script.size() && ready(session, script[cursor])) {
      session.submit_json(script[cursor].command);
      session.set_headless_cursor(++cursor);
      submitted = true;
    }
    // At rest nothing changes except the clock, so only a tick condition can
    // still unblock the script.
    if (!submitted && at_rest(session) && (cursor >= script.size() || !script[cursor].after_tick)) {
      return HeadlessEnd::kFinished;
    }
    if (session.sim_time() - start >= options.max_ticks) return HeadlessEnd::kTickLimit;
    session.tick_once();
    if (options.crash_at_tick && session.sim_time() >= *options.crash_at_tick) std::_Exit(137);
  }
  return HeadlessEnd::kShutdown;
}

}  // namespace chargebt::gateway
