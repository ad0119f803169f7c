#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chargebt/fsm/phase.hpp"
#include "chargebt/gateway/session.hpp"

namespace chargebt::gateway {

// One scripted command. It is submitted once every "after" condition holds.
struct ScriptStep {
  nlohmann::json command;
  std::optional<fsm::Phase> after_phase;  // phase reached and its tree settled
  std::optional<std::uint64_t> after_tick;
  bool after_prompt = false;
  int line = 0;
};

class ScriptError : public std::runtime_error {
 public:
  ScriptError(const std::string& what, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what) {}
};

// JSON lines; blank lines and lines starting with '#' are skipped.
std::vector<ScriptStep> parse_script(const std::string& text);
std::vector<ScriptStep> load_script(const std::string& path);

struct HeadlessOptions {
  std::uint64_t max_ticks = 2'000'000;
  std::optional<std::uint64_t> crash_at_tick;  // simulated power loss: _Exit without cleanup
};

enum class HeadlessEnd { kFinished, kShutdown, kTickLimit };

// Drives `session` through the script as fast as possible. Stops once the
// script is used up and the mission is complete, idle, paused or waiting on
// an operator prompt.
HeadlessEnd run_headless(Session& session, const std::vector<ScriptStep>& script, const HeadlessOptions& options);

}  // namespace chargebt::gateway
