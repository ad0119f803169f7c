#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chargebt/bt/runtime.hpp"
#include "chargebt/fsm/phase.hpp"

namespace chargebt::fsm {

struct AssistancePrompt {
  Phase phase = Phase::kIdle;
  std::string node_id;  // deepest labelled control node on the failure path
  std::string label;
  std::string leaf_id;  // node where the failure started
  std::string hole_id;
  std::string reason;
  std::vector<Resolution> resolutions;
  std::uint64_t tick = 0;

  bool operator==(const AssistancePrompt&) const = default;
};

struct ResolutionArgs {
  std::string hole_id;
  double dx = 0.0;
  double dy = 0.0;
};

// Domain side of the orchestrator: what entering a phase or resolving a
// prompt means for the mission and the world.
class OrchestratorHooks {
 public:
  virtual ~OrchestratorHooks() = default;
  virtual void on_phase_entered(Phase phase, EventKind via) {
    (void)phase;
    (void)via;
  }
  // Fills hole_id and reason. A hole id enables SkipHole and TeleopNudge.
  virtual void on_failure(AssistancePrompt& prompt) { (void)prompt; }
  // Throws to refuse the resolution; the prompt then stays active.
  virtual void on_resolution(Resolution r, const AssistancePrompt& prompt, const ResolutionArgs& args) {
    (void)r;
    (void)prompt;
    (void)args;
  }
};

struct StepResult {
  bool ticked = false;
  std::optional<bt::TickResult> tick;
  std::optional<EventKind> emitted;
  bool prompt_raised = false;
};

// Resolutions offered for a failure in `phase`, before hole filtering.
std::vector<Resolution> offered_resolutions(Phase phase, bool has_hole);

// Walks a failed tick from the root down the failing children.
AssistancePrompt describe_failure(const bt::Tree& tree, const bt::TickTrace& trace, Phase phase);

// High-level mission FSM. One runtime per phase tree; at most one of them is
// ever running. Not thread-safe: driven from the tick loop only.
class Orchestrator {
 public:
  using TreeMap = std::map<Phase, std::shared_ptr<const bt::Tree>>;

  Orchestrator(const TreeMap& trees, const bt::BehaviorRegistry& registry, bt::Blackboard& blackboard,
               OrchestratorHooks* hooks = nullptr);

  Phase phase() const { return phase_; }
  bool paused() const { return paused_; }
  const std::optional<AssistancePrompt>& prompt() const { return prompt_; }
  // True when the next step() will tick a tree.
  bool ticking() const;

  // Throws RejectedEvent when (phase, event) is not in the table, while a
  // prompt is waiting, or while paused.
  Phase handle_event(EventKind event);

  // Maps a finished tick to the FSM. Success may emit and apply an event;
  // Failure raises a prompt.
  std::optional<EventKind> on_bt_result(bt::Status status, const bt::TickTrace& trace);

  StepResult step();

  // Returns the actions that were preempted.
  std::vector<std::string> pause();
  void resume();

  std::optional<EventKind> resolve_assistance(Resolution r, const ResolutionArgs& args = {});

  // Re-enters a saved phase with fresh runtimes; no phase-entry hooks run.
  void restore(Phase phase, bool paused, std::optional<AssistancePrompt> prompt);

  bt::TreeRuntime* runtime();
  const bt::TreeRuntime* runtime() const;
  const bt::TreeRuntime* runtime_for(Phase p) const;
  std::shared_ptr<const bt::Tree> tree(Phase p) const;
  // Total over all phase runtimes; used to check that only one tree runs.
  std::size_t running_runtimes() const;

 private:
  void enter(Phase to, EventKind via);

  std::map<Phase, std::unique_ptr<bt::TreeRuntime>> runtimes_;
  TreeMap trees_;
  OrchestratorHooks* hooks_;
  OrchestratorHooks default_hooks_;
  Phase phase_ = Phase::kIdle;
  bool paused_ = false;
  std::optional<AssistancePrompt> prompt_;
};

}  // namespace chargebt::fsm
