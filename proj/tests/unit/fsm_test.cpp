#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "chargebt/bt/registry.hpp"
#include "chargebt/bt/tree.hpp"
#include "chargebt/fsm/orchestrator.hpp"
#include "chargebt/fsm/phase.hpp"

using namespace chargebt;
using bt::Status;
using fsm::EventKind;
using fsm::Phase;
using fsm::Resolution;

namespace {

// Each phase tree is a labelled sequence around one scripted leaf, so the
// test decides what every tick returns.
struct Scripted {
  Scripted() {
    for (Phase p : fsm::kAllPhases) {
      const auto name = fsm::phase_tree(p);
      if (!name) continue;
      const std::string leaf = "Do" + std::string(*name);
      registry.register_stateless_action(
          leaf,
          [this, p](bt::LeafContext&) {
            ++ticks[p];
            return next[p];
          },
          [this, p](bt::LeafContext& ctx) { log.push_back("halt " + ctx.node_id()); (void)p; });
      auto root = bt::build::sequence(std::string(*name) + "_root", {bt::build::action(leaf + "_leaf", leaf)});
      root.label = std::string(*name) + " step";
      trees[p] = bt::Tree::compile(root);
      next[p] = Status::kRunning;
    }
  }

  fsm::Orchestrator::TreeMap trees;
  bt::BehaviorRegistry registry;
  bt::Blackboard bb;
  std::map<Phase, Status> next;
  std::map<Phase, int> ticks;
  std::vector<std::string> log;
};

struct RecordingHooks : fsm::OrchestratorHooks {
  explicit RecordingHooks(std::vector<std::string>& log) : log(log) {}
  void on_phase_entered(Phase p, EventKind via) override {
    log.push_back("enter " + std::string(fsm::to_string(p)) + " via " + std::string(fsm::to_string(via)));
  }
  void on_failure(fsm::AssistancePrompt& p) override {
    p.hole_id = hole;
    p.reason = "scripted";
  }
  std::vector<std::string>& log;
  std::string hole;
};

// Written out by hand; every other (phase, event) pair must be rejected.
const std::map<std::pair<Phase, EventKind>, Phase> kExpected = {
    {{Phase::kIdle, EventKind::kStartMission}, Phase::kPreScan},
    {{Phase::kPreScan, EventKind::kScanComplete}, Phase::kDetectHoles},
    {{Phase::kDetectHoles, EventKind::kNewHolesDetected}, Phase::kChargePlan},
    {{Phase::kChargePlan, EventKind::kStartCharging}, Phase::kCharging},
    {{Phase::kCharging, EventKind::kRePlan}, Phase::kChargePlan},
    {{Phase::kChargePlan, EventKind::kScanAgain}, Phase::kDetectHoles},
    {{Phase::kCharging, EventKind::kChargingComplete}, Phase::kMissionComplete},
};

void drive_to(fsm::Orchestrator& o, Phase target) {
  const std::vector<EventKind> path = {EventKind::kStartMission, EventKind::kScanComplete,
                                       EventKind::kNewHolesDetected, EventKind::kStartCharging,
                                       EventKind::kChargingComplete};
  for (EventKind e : path) {
    if (o.phase() == target) return;
    o.handle_event(e);
  }
  ASSERT_EQ(o.phase(), target);
}

}  // namespace

TEST(Transitions, AllFortyEightPairs) {
  int accepted = 0;
  for (Phase from : fsm::kAllPhases) {
    for (EventKind ev : fsm::kAllEvents) {
      const auto it = kExpected.find({from, ev});
      const auto got = fsm::lookup(from, ev);
      if (it == kExpected.end()) {
        EXPECT_FALSE(got.has_value()) << fsm::to_string(from) << " + " << fsm::to_string(ev);
      } else {
        ASSERT_TRUE(got.has_value()) << fsm::to_string(from) << " + " << fsm::to_string(ev);
        EXPECT_EQ(*got, it->second);
        ++accepted;
      }
    }
  }
  EXPECT_EQ(accepted, 7);
  EXPECT_EQ(fsm::transition_table().size(), 7u);
}

TEST(Transitions, OrchestratorRejectsEverythingElse) {
  for (Phase from : fsm::kAllPhases) {
    for (EventKind ev : fsm::kAllEvents) {
      Scripted s;
      fsm::Orchestrator o(s.trees, s.registry, s.bb);
      drive_to(o, from);
      if (kExpected.count({from, ev}) != 0) {
        EXPECT_EQ(o.handle_event(ev), kExpected.at({from, ev}));
      } else {
        EXPECT_THROW(o.handle_event(ev), fsm::RejectedEvent);
        EXPECT_EQ(o.phase(), from);
      }
    }
  }
}

TEST(Names, RoundTrip) {
  for (Phase p : fsm::kAllPhases) EXPECT_EQ(fsm::phase_from_string(fsm::to_string(p)), p);
  for (EventKind e : fsm::kAllEvents) EXPECT_EQ(fsm::event_from_string(fsm::to_string(e)), e);
  EXPECT_FALSE(fsm::phase_from_string("Charging ").has_value());
}

TEST(Orchestrator, TreeSuccessDrivesThePhases) {
  Scripted s;
  RecordingHooks hooks(s.log);
  fsm::Orchestrator o(s.trees, s.registry, s.bb, &hooks);
  EXPECT_FALSE(o.step().ticked);  // Idle has no tree
  o.handle_event(EventKind::kStartMission);

  s.next[Phase::kPreScan] = Status::kSuccess;
  EXPECT_EQ(o.step().emitted, EventKind::kScanComplete);
  EXPECT_EQ(o.phase(), Phase::kDetectHoles);

  s.next[Phase::kDetectHoles] = Status::kSuccess;
  EXPECT_EQ(o.step().emitted, EventKind::kNewHolesDetected);
  EXPECT_EQ(o.phase(), Phase::kChargePlan);

  // A finished plan waits for the operator.
  s.next[Phase::kChargePlan] = Status::kSuccess;
  const auto r = o.step();
  EXPECT_TRUE(r.ticked);
  EXPECT_FALSE(r.emitted.has_value());
  EXPECT_EQ(o.phase(), Phase::kChargePlan);

  o.handle_event(EventKind::kStartCharging);
  s.next[Phase::kCharging] = Status::kRunning;
  EXPECT_EQ(o.step().tick->status, Status::kRunning);
  s.next[Phase::kCharging] = Status::kSuccess;
  EXPECT_EQ(o.step().emitted, EventKind::kChargingComplete);
  EXPECT_EQ(o.phase(), Phase::kMissionComplete);
  EXPECT_FALSE(o.step().ticked);

  const std::vector<std::string> entered = {"enter PreScan via StartMission", "enter DetectHoles via ScanComplete",
                                            "enter ChargePlan via NewHolesDetected",
                                            "enter Charging via StartCharging",
                                            "enter MissionComplete via ChargingComplete"};
  std::vector<std::string> got;
  for (const auto& l : s.log) {
    if (l.rfind("enter", 0) == 0) got.push_back(l);
  }
  EXPECT_EQ(got, entered);
}

TEST(Orchestrator, FailureRaisesPromptAndBlocksEvents) {
  Scripted s;
  RecordingHooks hooks(s.log);
  hooks.hole = "H7";
  fsm::Orchestrator o(s.trees, s.registry, s.bb, &hooks);
  drive_to(o, Phase::kCharging);
  s.next[Phase::kCharging] = Status::kFailure;
  const auto r = o.step();
  EXPECT_TRUE(r.prompt_raised);
  ASSERT_TRUE(o.prompt().has_value());
  const auto& p = *o.prompt();
  EXPECT_EQ(p.node_id, "Charging_root");
  EXPECT_EQ(p.label, "Charging step");
  EXPECT_EQ(p.leaf_id, "DoCharging_leaf");
  EXPECT_EQ(p.hole_id, "H7");
  EXPECT_EQ(p.resolutions, (std::vector<Resolution>{Resolution::kRetry, Resolution::kSkipHole, Resolution::kRePlan,
                                                     Resolution::kTeleopNudge, Resolution::kAbort}));

  const int before = s.ticks[Phase::kCharging];
  EXPECT_FALSE(o.step().ticked);
  EXPECT_EQ(s.ticks[Phase::kCharging], before);
  EXPECT_THROW(o.handle_event(EventKind::kRePlan), fsm::RejectedEvent);
  EXPECT_THROW(o.resolve_assistance(Resolution::kScanAgain), fsm::InvalidResolutionForPhase);

  s.next[Phase::kCharging] = Status::kRunning;
  EXPECT_FALSE(o.resolve_assistance(Resolution::kRetry).has_value());
  EXPECT_FALSE(o.prompt().has_value());
  EXPECT_TRUE(o.step().ticked);
}

TEST(Orchestrator, HolelessPromptDropsHoleResolutions) {
  Scripted s;
  fsm::Orchestrator o(s.trees, s.registry, s.bb);
  drive_to(o, Phase::kCharging);
  s.next[Phase::kCharging] = Status::kFailure;
  o.step();
  EXPECT_EQ(o.prompt()->resolutions,
            (std::vector<Resolution>{Resolution::kRetry, Resolution::kRePlan, Resolution::kAbort}));
  EXPECT_THROW(o.resolve_assistance(Resolution::kSkipHole), fsm::InvalidResolutionForPhase);
}

TEST(Orchestrator, CommandErrors) {
  Scripted s;
  fsm::Orchestrator o(s.trees, s.registry, s.bb);
  EXPECT_THROW(o.pause(), fsm::NotRunning);
  EXPECT_THROW(o.resume(), fsm::NotPaused);
  EXPECT_THROW(o.resolve_assistance(Resolution::kRetry), fsm::NoActivePrompt);
  drive_to(o, Phase::kPreScan);
  o.pause();
  EXPECT_THROW(o.pause(), fsm::NotRunning);
  EXPECT_FALSE(o.step().ticked);
  EXPECT_THROW(o.handle_event(EventKind::kScanComplete), fsm::RejectedEvent);
  o.resume();
  EXPECT_TRUE(o.step().ticked);
}

TEST(Orchestrator, PauseHaltsRunningLeaf) {
  Scripted s;
  fsm::Orchestrator o(s.trees, s.registry, s.bb);
  drive_to(o, Phase::kCharging);
  o.step();
  EXPECT_EQ(o.running_runtimes(), 1u);
  EXPECT_EQ(o.pause(), (std::vector<std::string>{"DoCharging_leaf"}));
  EXPECT_EQ(o.running_runtimes(), 0u);
  EXPECT_EQ(s.log, (std::vector<std::string>{"halt DoCharging_leaf"}));
}

TEST(Orchestrator, RePlanHaltsBeforeEnteringChargePlan) {
  Scripted s;
  RecordingHooks hooks(s.log);
  hooks.hole = "H1";
  fsm::Orchestrator o(s.trees, s.registry, s.bb, &hooks);
  drive_to(o, Phase::kCharging);
  o.step();  // leaf running
  s.log.clear();
  o.handle_event(EventKind::kRePlan);
  EXPECT_EQ(s.log, (std::vector<std::string>{"halt DoCharging_leaf", "enter ChargePlan via RePlan"}));
  EXPECT_EQ(o.running_runtimes(), 0u);

  // Same through a prompt resolution.
  o.handle_event(EventKind::kStartCharging);
  s.next[Phase::kCharging] = Status::kFailure;
  o.step();
  s.log.clear();
  EXPECT_EQ(o.resolve_assistance(Resolution::kRePlan), EventKind::kRePlan);
  EXPECT_EQ(o.phase(), Phase::kChargePlan);
  EXPECT_EQ(s.log, (std::vector<std::string>{"enter ChargePlan via RePlan"}));
}

TEST(Orchestrator, AbortReturnsToIdle) {
  Scripted s;
  fsm::Orchestrator o(s.trees, s.registry, s.bb);
  drive_to(o, Phase::kDetectHoles);
  s.next[Phase::kDetectHoles] = Status::kFailure;
  o.step();
  EXPECT_EQ(o.prompt()->resolutions, (std::vector<Resolution>{Resolution::kRetry, Resolution::kAbort}));
  o.resolve_assistance(Resolution::kAbort);
  EXPECT_EQ(o.phase(), Phase::kIdle);
  EXPECT_FALSE(o.prompt().has_value());
}

TEST(Orchestrator, NeverMoreThanOneTreeRunning) {
  std::mt19937 rng(1234);
  for (int round = 0; round < 50; ++round) {
    Scripted s;
    fsm::Orchestrator o(s.trees, s.registry, s.bb);
    for (int i = 0; i < 200; ++i) {
      const int pick = static_cast<int>(rng() % 10);
      for (auto& [p, st] : s.next) {
        const int r = static_cast<int>(rng() % 10);
        st = r < 7 ? Status::kRunning : (r < 9 ? Status::kSuccess : Status::kFailure);
      }
      try {
        if (pick < 5) {
          o.step();
        } else if (pick < 7) {
          o.handle_event(fsm::kAllEvents[rng() % fsm::kAllEvents.size()]);
        } else if (pick == 7) {
          o.paused() ? o.resume() : (void)o.pause();
        } else if (o.prompt()) {
          const auto& offered = o.prompt()->resolutions;
          o.resolve_assistance(offered[rng() % offered.size()]);
        }
      } catch (const fsm::FsmError&) {
      }
      ASSERT_LE(o.running_runtimes(), 1u);
      if (o.running_runtimes() == 1u) {
        ASSERT_NE(o.runtime(), nullptr);
        ASSERT_TRUE(o.runtime()->any_running());
      }
    }
  }
}

TEST(Orchestrator, RestoreSkipsEntryHooks) {
  Scripted s;
  RecordingHooks hooks(s.log);
  fsm::Orchestrator o(s.trees, s.registry, s.bb, &hooks);
  o.restore(Phase::kCharging, true, std::nullopt);
  EXPECT_TRUE(s.log.empty());
  EXPECT_EQ(o.phase(), Phase::kCharging);
  EXPECT_TRUE(o.paused());
  o.restore(Phase::kIdle, true, std::nullopt);
  EXPECT_FALSE(o.paused());
}
