#include "chargebt/gateway/mission_hooks.hpp"

#include "chargebt/mission/trees.hpp"

namespace chargebt::gateway {

using fsm::Phase;
using mission::HoleState;

void MissionHooks::on_phase_entered(Phase phase, fsm::EventKind) {
  auto& s = world_.state();
  switch (phase) {
    case Phase::kPreScan:
      s.face_scanned = false;
      break;
    case Phase::kDetectHoles:
      s.holes_detected = false;
      break;
    case Phase::kChargePlan: {
      s.mission_planned = false;
      for (const auto& h : store_.holes()) {
        if (!mission::is_terminal(h.state)) store_.reopen(h.id);
      }
      // A detonator already in the tip belongs to the old plan.
      s.tip_loaded_for.clear();
      s.secondary.target.clear();
      s.hose = sim::HoseState{};
      bb_.erase(mission::kCurrentHole);
      bb_.erase(mission::kPrepHole);
      bb_.set(mission::kGiveReady, false);
      bb_.set(mission::kTakeReady, false);
      break;
    }
    case Phase::kIdle:
    case Phase::kCharging:
    case Phase::kMissionComplete:
      break;
  }
}

void MissionHooks::on_failure(fsm::AssistancePrompt& prompt) {
  auto& s = world_.state();
  prompt.reason = s.last_failure.empty() ? "tree failed at " + prompt.leaf_id : s.last_failure;
  const std::string& hole = s.last_failure_hole;
  if (prompt.phase != Phase::kCharging || hole.empty()) return;
  const auto* h = store_.find(hole);
  if (h == nullptr) return;
  if (h->state == HoleState::kCharging) store_.set_state(hole, HoleState::kFailed);
  if (store_.hole(hole).state == HoleState::kFailed) {
    prompt.hole_id = hole;
  } else {
    prompt.reason += " (hole " + hole + ")";
  }
}

void MissionHooks::discard_for(const std::string& hole) {
  auto& s = world_.state();
  if (s.tip_loaded_for == hole) s.tip_loaded_for.clear();
  if (s.hose.hole == hole) s.hose = sim::HoseState{};
  if (s.secondary.target == hole) s.secondary.target.clear();
  if (s.tool_at == hole) s.tool_at.clear();
}

void MissionHooks::nudge(const std::string& hole, double dx, double dy) {
  const auto& h = store_.hole(hole);
  if (mission::is_terminal(h.state)) throw mission::MissionError("hole '" + hole + "' is already finished");
  store_.update_estimate(hole, h.x + dx, h.y + dy);
  world_.state().approach_failed.erase(hole);
  if (bb_.contains(mission::kCurrentHole) && bb_.get_as<HoleRecord>(mission::kCurrentHole).id == hole) {
    bb_.set(mission::kCurrentHole, store_.hole(hole).record());
  }
}

void MissionHooks::on_resolution(fsm::Resolution r, const fsm::AssistancePrompt& prompt,
                                 const fsm::ResolutionArgs& args) {
  const std::string hole = args.hole_id.empty() ? prompt.hole_id : args.hole_id;
  auto reactivate = [&] {
    if (!hole.empty() && store_.find(hole) != nullptr && store_.hole(hole).state == HoleState::kFailed) {
      store_.set_state(hole, HoleState::kCharging);
    }
  };
  switch (r) {
    case fsm::Resolution::kRetry:
      if (!hole.empty()) world_.state().approach_failed.erase(hole);
      reactivate();
      break;
    case fsm::Resolution::kTeleopNudge:
      if (hole.empty()) throw mission::MissionError("TeleopNudge needs a hole");
      nudge(hole, args.dx, args.dy);
      reactivate();
      break;
    case fsm::Resolution::kSkipHole:
      if (hole.empty()) throw mission::MissionError("SkipHole needs a hole");
      store_.set_state(hole, HoleState::kSkipped);
      discard_for(hole);
      break;
    case fsm::Resolution::kRePlan:
    case fsm::Resolution::kScanAgain:
    case fsm::Resolution::kAbort:
      break;
  }
}

}  // namespace chargebt::gateway
