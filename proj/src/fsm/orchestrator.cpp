#include "chargebt/fsm/orchestrator.hpp"

#include <algorithm>
#include <unordered_map>

namespace chargebt::fsm {

std::vector<Resolution> offered_resolutions(Phase phase, bool has_hole) {
  using enum Resolution;
  switch (phase) {
    case Phase::kCharging:
      if (has_hole) return {kRetry, kSkipHole, kRePlan, kTeleopNudge, kAbort};
      return {kRetry, kRePlan, kAbort};
    case Phase::kChargePlan:
      return {kRetry, kScanAgain, kAbort};
    case Phase::kPreScan:
    case Phase::kDetectHoles:
      return {kRetry, kAbort};
    case Phase::kIdle:
    case Phase::kMissionComplete:
      break;
  }
  return {};
}

AssistancePrompt describe_failure(const bt::Tree& tree, const bt::TickTrace& trace, Phase phase) {
  std::unordered_map<std::string, bt::Status> status;
  for (const auto& e : trace.entries) status[e.node_id] = e.status;
  auto failed = [&](std::size_t i) {
    auto it = status.find(tree.node(i).id);
    return it != status.end() && it->second == bt::Status::kFailure;
  };

  AssistancePrompt p;
  p.phase = phase;
  p.tick = trace.tick;
  std::size_t at = 0;
  std::optional<std::size_t> labelled;
  while (true) {
    const auto& n = tree.node(at);
    if (!bt::is_leaf(n.kind) && n.explicit_label) labelled = at;
    std::optional<std::size_t> next;
    for (std::size_t c : n.children) {
      if (failed(c)) next = c;
    }
    if (!next) break;
    at = *next;
  }
  p.leaf_id = tree.node(at).id;
  const auto& shown = tree.node(labelled.value_or(at));
  p.node_id = shown.id;
  p.label = shown.label;
  return p;
}

Orchestrator::Orchestrator(const TreeMap& trees, const bt::BehaviorRegistry& registry, bt::Blackboard& blackboard,
                           OrchestratorHooks* hooks)
    : trees_(trees), hooks_(hooks != nullptr ? hooks : &default_hooks_) {
  for (Phase p : kAllPhases) {
    if (!phase_tree(p)) continue;
    auto it = trees.find(p);
    if (it == trees.end() || !it->second) {
      throw FsmError("no tree for phase " + std::string(to_string(p)));
    }
    runtimes_[p] = std::make_unique<bt::TreeRuntime>(it->second, registry, blackboard);
  }
}

bool Orchestrator::ticking() const { return runtimes_.count(phase_) != 0 && !paused_ && !prompt_; }

bt::TreeRuntime* Orchestrator::runtime() {
  auto it = runtimes_.find(phase_);
  return it == runtimes_.end() ? nullptr : it->second.get();
}

const bt::TreeRuntime* Orchestrator::runtime() const {
  auto it = runtimes_.find(phase_);
  return it == runtimes_.end() ? nullptr : it->second.get();
}

const bt::TreeRuntime* Orchestrator::runtime_for(Phase p) const {
  auto it = runtimes_.find(p);
  return it == runtimes_.end() ? nullptr : it->second.get();
}

std::shared_ptr<const bt::Tree> Orchestrator::tree(Phase p) const {
  auto it = trees_.find(p);
  return it == trees_.end() ? nullptr : it->second;
}

std::size_t Orchestrator::running_runtimes() const {
  return static_cast<std::size_t>(
      std::count_if(runtimes_.begin(), runtimes_.end(), [](const auto& kv) { return kv.second->any_running(); }));
}

void Orchestrator::enter(Phase to, EventKind via) {
  if (auto* rt = runtime()) rt->halt_all();
  phase_ = to;
  hooks_->on_phase_entered(to, via);
  if (auto* rt = runtime()) rt->reset();
}

Phase Orchestrator::handle_event(EventKind event) {
  const auto to = lookup(phase_, event);
  if (!to) throw RejectedEvent(phase_, event);
  if (prompt_) throw RejectedEvent(phase_, event, "assistance prompt pending");
  if (paused_) throw RejectedEvent(phase_, event, "paused");
  enter(*to, event);
  return *to;
}

std::optional<EventKind> Orchestrator::on_bt_result(bt::Status status, const bt::TickTrace& trace) {
  if (status == bt::Status::kSuccess) {
    std::optional<EventKind> ev;
    switch (phase_) {
      case Phase::kPreScan:
        ev = EventKind::kScanComplete;
        break;
      case Phase::kDetectHoles:
        ev = EventKind::kNewHolesDetected;
        break;
      case Phase::kCharging:
        ev = EventKind::kChargingComplete;
        break;
      default:
        break;  // a finished plan waits for the operator
    }
    if (ev) handle_event(*ev);
    return ev;
  }
  if (status == bt::Status::kFailure) {
    const bt::Tree& t = runtime() != nullptr ? runtime()->tree() : *tree(phase_);
    AssistancePrompt p = describe_failure(t, trace, phase_);
    hooks_->on_failure(p);
    p.resolutions = offered_resolutions(phase_, !p.hole_id.empty());
    if (auto* rt = runtime()) rt->halt_all();
    prompt_ = std::move(p);
  }
  return std::nullopt;
}

StepResult Orchestrator::step() {
  StepResult r;
  if (!ticking()) return r;
  r.ticked = true;
  r.tick = runtime()->tick_root();
  if (r.tick->status != bt::Status::kRunning) {
    r.emitted = on_bt_result(r.tick->status, r.tick->trace);
    r.prompt_raised = prompt_.has_value();
  }
  return r;
}

std::vector<std::string> Orchestrator::pause() {
  if (runtime() == nullptr || paused_) throw NotRunning(phase_);
  paused_ = true;
  return runtime()->halt_all();
}

void Orchestrator::resume() {
  if (!paused_) throw NotPaused();
  paused_ = false;
  runtime()->reset();
}

std::optional<EventKind> Orchestrator::resolve_assistance(Resolution r, const ResolutionArgs& args) {
  if (!prompt_) throw NoActivePrompt();
  const auto& offered = prompt_->resolutions;
  if (std::find(offered.begin(), offered.end(), r) == offered.end()) throw InvalidResolutionForPhase(r, phase_);
  if (paused_) throw RejectedEvent(phase_, EventKind::kAssistanceResolved, "paused");
  hooks_->on_resolution(r, *prompt_, args);
  prompt_.reset();
  switch (r) {
    case Resolution::kRePlan:
      handle_event(EventKind::kRePlan);
      return EventKind::kRePlan;
    case Resolution::kScanAgain:
      handle_event(EventKind::kScanAgain);
      return EventKind::kScanAgain;
    case Resolution::kAbort:
      if (auto* rt = runtime()) rt->halt_all();
      phase_ = Phase::kIdle;
      paused_ = false;
      return std::nullopt;
    case Resolution::kRetry:
    case Resolution::kSkipHole:
    case Resolution::kTeleopNudge:
      if (auto* rt = runtime()) rt->reset();
      return std::nullopt;
  }
  return std::nullopt;
}

void Orchestrator::restore(Phase phase, bool paused, std::optional<AssistancePrompt> prompt) {
  for (auto& [p, rt] : runtimes_) rt->reset();
  phase_ = phase;
  paused_ = paused && runtimes_.count(phase) != 0;
  prompt_ = std::move(prompt);
}

}  // namespace chargebt::fsm
