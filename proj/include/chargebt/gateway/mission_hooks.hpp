#pragma once

#include "chargebt/bt/blackboard.hpp"
#include "chargebt/fsm/orchestrator.hpp"
#include "chargebt/mission/mission.hpp"
#include "chargebt/sim/world.hpp"

namespace chargebt::gateway {

// What phase entries and operator resolutions do to the mission, the world
// and the blackboard.
class MissionHooks final : public fsm::OrchestratorHooks {
 public:
  MissionHooks(sim::SimWorld& world, mission::MissionStore& store, bt::Blackboard& blackboard)
      : world_(world), store_(store), bb_(blackboard) {}

  void on_phase_entered(fsm::Phase phase, fsm::EventKind via) override;
  void on_failure(fsm::AssistancePrompt& prompt) override;
  void on_resolution(fsm::Resolution r, const fsm::AssistancePrompt& prompt, const fsm::ResolutionArgs& args) override;

  // Operator pose correction of a hole estimate. Throws MissionError for
  // unknown or finished holes.
  void nudge(const std::string& hole, double dx, double dy);

 private:
  void discard_for(const std::string& hole);

  sim::SimWorld& world_;
  mission::MissionStore& store_;
  bt::Blackboard& bb_;
};

}  // namespace chargebt::gateway
