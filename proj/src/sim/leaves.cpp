#include "chargebt/sim/leaves.hpp"

#include <algorithm>
#include <cmath>

namespace chargebt::sim {

namespace {

using bt::LeafContext;
using bt::Status;
using mission::HoleState;

constexpr Status kS = Status::kSuccess;
constexpr Status kF = Status::kFailure;
constexpr Status kR = Status::kRunning;

Status flag(bool b) { return b ? kS : kF; }

class Rig {
 public:
  Rig(SimWorld& world, mission::MissionStore& store) : w_(world), store_(store) {}

  WorldState& s() { return w_.state(); }
  const Timings& timings() const { return w_.scenario().timings; }

  // PeekNextHole names the port "current"; every other leaf uses "hole".
  std::string current(LeafContext& ctx) const {
    for (const char* port : {"hole", "current"}) {
      if (ctx.has_input(port)) return ctx.input<HoleRecord>(port).id;
    }
    return {};
  }
  bool charging(const std::string& id) const {
    const auto* h = store_.find(id);
    return h != nullptr && h->state == HoleState::kCharging;
  }

  Status fail(const std::string& hole, std::string why) {
    s().last_failure_hole = hole;
    s().last_failure = std::move(why);
    return kF;
  }

  double estimate_error(const std::string& id) const {
    const auto& est = store_.hole(id);
    const TruthHole* t = w_.truth(id);
    return std::hypot(est.x - t->x, est.y - t->y);
  }

  // Setup phases.

  Status face_scanned(LeafContext&) { return flag(s().face_scanned); }
  Status holes_detected(LeafContext&) { return flag(s().holes_detected); }
  Status mission_planned(LeafContext&) { return flag(s().mission_planned); }

  Status scan_face(LeafContext&) {
    if (s().face_scanned) return kS;
    if (!w_.advance("sensor", "scan", timings().scan_ticks)) return kR;
    s().face_scanned = true;
    return kS;
  }

  Status detect_holes(LeafContext&) {
    if (s().holes_detected) return kS;
    if (!w_.advance("sensor", "detect", timings().detect_ticks)) return kR;
    const double sigma = w_.scenario().rig.detection_noise;
    for (const TruthHole& t : w_.scenario().holes) {
      const std::string channel = "detect" + std::to_string(s().detect_rounds);
      double x = t.x + w_.gaussian(channel, t.id, sigma);
      double y = t.y + w_.gaussian(channel, t.id, sigma);
      if (const ScriptedFault* f = w_.take_fault(FaultKind::kPoseOffset, t.id)) {
        x += f->dx;
        y += f->dy;
      }
      if (const auto* known = store_.find(t.id)) {
        if (mission::is_terminal(known->state)) continue;
        store_.reopen(t.id);
        store_.update_estimate(t.id, x, y);
        s().approach_failed.erase(t.id);
      } else {
        mission::ChargeHole h;
        h.id = t.id;
        h.x = x;
        h.y = y;
        h.depth = t.depth;
        h.collar_direction = t.collar_direction;
        store_.add(std::move(h));
      }
    }
    ++s().detect_rounds;
    s().holes_detected = true;
    return kS;
  }

  Status plan_charging(LeafContext&) {
    if (s().mission_planned) return kS;
    if (!w_.advance("planner", "plan", timings().plan_ticks)) return kR;
    try {
      store_.plan(w_.scenario().plan, "planner");
    } catch (const mission::MissionError& e) {
      return fail("", e.what());
    }
    s().mission_planned = true;
    return kS;
  }

  // Charging arm.

  Status mission_queue_empty(LeafContext& ctx) {
    if (!store_.mission()) return kF;
    return flag(store_.mission()->queue.empty() && !charging(current(ctx)));
  }

  Status pop_hole(LeafContext& ctx) {
    if (charging(current(ctx))) return kS;
    if (!store_.mission()) return fail("", "no mission planned");
    if (store_.mission()->queue.empty()) return fail("", "mission queue is empty");
    mission::pop_next(store_, ctx.blackboard(), ctx.key_for("hole"));
    return kS;
  }

  Status at_hole(LeafContext& ctx) { return flag(!s().tool_at.empty() && s().tool_at == current(ctx)); }

  Status move_boom(LeafContext& ctx) {
    const std::string id = current(ctx);
    const auto& h = store_.hole(id);
    const std::string region = w_.region_of(h.x, h.y);
    if (s().boom_region == region) return kS;
    s().tool_at.clear();
    if (!w_.advance("boom", "move:" + region, timings().boom_move_ticks)) return kR;
    s().boom_region = region;
    return kS;
  }

  Status position_at_hole(LeafContext& ctx) {
    const std::string id = current(ctx);
    if (s().tool_at == id) return kS;
    if (s().lost.count(id) != 0) return fail(id, "hole not visible from the approach pose");
    if (s().approach_failed.count(id) != 0) return fail(id, "hole estimate out of tolerance");
    const auto& h = store_.hole(id);
    if (s().boom_region != w_.region_of(h.x, h.y)) return fail(id, "boom is not at the hole region");
    if (!w_.advance("primary", "approach:" + id, timings().approach_ticks)) return kR;
    if (s().approached.insert(id).second) {
      const bool scripted = w_.take_fault(FaultKind::kHoleNotFound, id) != nullptr;
      const bool drawn = w_.chance("hole_not_found", id, w_.scenario().fault_config.p_hole_not_found_at_approach);
      if (scripted || drawn) {
        s().lost.insert(id);
        return fail(id, "hole not found at approach");
      }
    }
    if (estimate_error(id) > w_.scenario().rig.position_tolerance) {
      s().approach_failed.insert(id);
      return fail(id, "hole estimate out of tolerance");
    }
    s().tool_at = id;
    return kS;
  }

  Status sweep_search(LeafContext& ctx) {
    const std::string id = current(ctx);
    if (!w_.advance("primary", "sweep:" + id, timings().sweep_ticks)) return kR;
    if (estimate_error(id) > w_.scenario().rig.sweep_radius) return fail(id, "hole outside the sweep area");
    if (s().lost.count(id) != 0) {
      const bool scripted_fail = w_.take_fault(FaultKind::kSweepFails, id) != nullptr;
      const bool found = w_.chance("sweep", id, w_.scenario().fault_config.p_sweep_recovery_success);
      if (scripted_fail || !found) return fail(id, "sweep did not find the hole");
      s().lost.erase(id);
    }
    const TruthHole* t = w_.truth(id);
    store_.update_estimate(id, t->x, t->y);
    s().approach_failed.erase(id);
    ctx.output("hole", store_.hole(id).record());
    return kS;
  }

  Status handover_take(LeafContext& ctx) {
    if (delivered(w_, current(ctx))) {
      ctx.output("take_ready", false);
      return kS;
    }
    ctx.output("take_ready", true);
    return kR;
  }

  Status hole_charged(LeafContext& ctx) {
    const auto* h = store_.find(current(ctx));
    return flag(h != nullptr && h->state == HoleState::kCharged);
  }

  Status feed_hose(LeafContext& ctx) {
    const std::string id = current(ctx);
    HoseState& hose = s().hose;
    if (s().pump_count[id] > 0 || hose.fed_for == id) return kS;
    if (s().tip_loaded_for != id) return fail(id, "no detonator in the hose tip");
    if (hose.hole != id) hose = HoseState{id, 0.0, "", std::nullopt, false};
    const double depth = store_.hole(id).depth;
    if (s().blockage_drawn.insert(id).second) {
      const ScriptedFault* f = w_.take_fault(FaultKind::kUnrecoverableBlockage, id);
      hose.unrecoverable = f != nullptr;
      if (f == nullptr) f = w_.take_fault(FaultKind::kHoseBlockage, id);
      const double u = w_.draw("blockage_depth", id);
      const bool drawn = w_.chance("blockage", id, w_.scenario().fault_config.p_hose_blockage_per_hole);
      if (f != nullptr) {
        hose.blocked_at = std::min(f->depth, depth);
      } else if (drawn) {
        hose.blocked_at = depth * (0.2 + 0.6 * u);
      }
    }
    if (hose.blocked_at && hose.length >= *hose.blocked_at) return fail(id, "hose blocked");
    const double limit = hose.blocked_at ? std::min(*hose.blocked_at, depth) : depth;
    hose.length = std::min(hose.length + timings().feed_rate, limit);
    if (hose.blocked_at && hose.length >= *hose.blocked_at) return fail(id, "hose blocked");
    if (hose.length < depth) return kR;
    hose.fed_for = id;
    return kS;
  }

  Status wiggle_hose(LeafContext& ctx) {
    const std::string id = current(ctx);
    HoseState& hose = s().hose;
    // Re-ticked by the reactive parent after a clear: nothing left to shake loose.
    if (hose.hole == id && !hose.blocked_at) return kS;
    if (!w_.advance("primary", "wiggle:" + id, timings().wiggle_ticks)) return kR;
    const bool clears = w_.chance("wiggle", id, w_.scenario().fault_config.p_wiggle_clears_blockage);
    if (hose.hole == id && hose.blocked_at && !hose.unrecoverable && clears) {
      hose.blocked_at.reset();
    }
    return kS;
  }

  Status pump(LeafContext& ctx) {
    const std::string id = current(ctx);
    if (s().pump_count[id] > 0) return kS;
    HoseState& hose = s().hose;
    if (hose.fed_for != id) return fail(id, "hose is not fed to the bottom of the hole");
    const auto& h = store_.hole(id);
    const std::int64_t target = to_grams(h.emulsion_target);
    const std::int64_t rate = std::max<std::int64_t>(1, to_grams(timings().pump_rate));
    std::int64_t& pumped = s().pumped_g[id];
    pumped += std::min(rate, target - pumped);
    if (pumped < target) {
      hose.length = h.depth * (1.0 - static_cast<double>(pumped) / static_cast<double>(target));
      return kR;
    }
    ++s().pump_count[id];
    hose = HoseState{};
    s().tip_loaded_for.clear();
    return kS;
  }

  Status mark_charged(LeafContext& ctx) {
    const std::string id = current(ctx);
    const auto& h = store_.hole(id);
    if (h.state == HoleState::kCharged) return kS;
    if (s().pump_count[id] == 0) return fail(id, "hole has not been pumped");
    store_.set_state(id, HoleState::kCharged);
    ctx.output("hole", store_.hole(id).record());
    return kS;
  }

  // Explosive-handling arm.

  // A leftover primed or held detonator does not keep the arm busy.
  Status preparation_queue_empty(LeafContext& ctx) {
    return flag(preparation_candidates(w_, store_, current(ctx)).empty());
  }

  // Points the secondary at the first hole still needing a detonator, keeping
  // the current target while it is valid.
  bool retarget(const std::string& current) {
    const auto candidates = preparation_candidates(w_, store_, current);
    auto& target = s().secondary.target;
    if (!target.empty() && std::find(candidates.begin(), candidates.end(), target) != candidates.end()) return true;
    target = candidates.empty() ? std::string() : candidates.front();
    return !target.empty();
  }

  Status holding_detonator(LeafContext&) { return flag(s().secondary.holding_detonator); }

  Status peek_next(LeafContext& ctx) {
    if (!retarget(current(ctx))) return fail("", "nothing left to prepare");
    ctx.output("next", store_.hole(s().secondary.target).record());
    return kS;
  }

  Status assemble(LeafContext&) {
    auto& sec = s().secondary;
    if (sec.target.empty()) return fail("", "no hole selected for preparation");
    if (sec.primed) return kS;
    if (s().inventory <= 0) return fail(sec.target, "detonator inventory is empty");
    if (!w_.advance("secondary", "assemble:" + sec.target, timings().assemble_ticks)) return kR;
    --s().inventory;
    sec.primed = true;
    return kS;
  }

  Status insert_in_tip(LeafContext&) {
    auto& sec = s().secondary;
    if (sec.holding_detonator) return kS;
    if (!sec.primed) return fail(sec.target, "no primed detonator");
    if (!w_.advance("secondary", "insert:" + sec.target, timings().insert_ticks)) return kR;
    sec.holding_detonator = true;
    sec.primed = false;
    return kS;
  }

  Status handover_give(LeafContext& ctx) {
    auto& sec = s().secondary;
    if (!sec.holding_detonator) {
      if (!sec.target.empty() && delivered(w_, sec.target)) return kS;
      return fail(sec.target, "no detonator to hand over");
    }
    if (!retarget(current(ctx))) return kR;
    const std::string target = sec.target;
    ctx.output("give_ready", true);
    const bool take_ready = ctx.has_input("take_ready") && ctx.input<bool>("take_ready");
    if (!take_ready || current(ctx) != target) return kR;
    if (!w_.advance("secondary", "transfer:" + target, timings().handover_ticks)) return kR;
    ctx.output("give_ready", false);
    ctx.output("take_ready", false);
    const bool scripted = w_.take_fault(FaultKind::kDetonatorDrop, target) != nullptr;
    const bool drawn = w_.chance("detonator_drop", target, w_.scenario().fault_config.p_detonator_drop);
    sec.holding_detonator = false;
    if (scripted || drawn) return fail(target, "detonator dropped during handover");
    s().tip_loaded_for = target;
    sec.target.clear();
    return kS;
  }

 private:
  SimWorld& w_;
  mission::MissionStore& store_;
};

}  // namespace

bool delivered(const SimWorld& world, const std::string& hole) {
  if (hole.empty()) return false;
  const auto& s = world.state();
  const auto it = s.pump_count.find(hole);
  return s.tip_loaded_for == hole || (it != s.pump_count.end() && it->second > 0);
}

std::vector<std::string> preparation_candidates(const SimWorld& world, const mission::MissionStore& store,
                                                const std::string& current) {
  std::vector<std::string> out;
  if (!store.mission()) return out;
  const auto* cur = current.empty() ? nullptr : store.find(current);
  if (cur != nullptr && cur->state == HoleState::kCharging && !delivered(world, current)) out.push_back(current);
  for (const auto& id : store.mission()->queue) {
    if (!delivered(world, id)) out.push_back(id);
  }
  return out;
}

std::vector<std::string> leaf_names() {
  return {"FaceScanned",    "ScanFace",         "HolesDetected",   "DetectHoles",
          "MissionPlanned", "PlanCharging",     "PreparationQueueEmpty", "IsRobotHoldingDetonator",
          "PeekNextHole",   "AssembleDetonator", "InsertDetonatorInHoseTip", "HandoverGive",
          "MissionQueueEmpty", "PopHole",       "AtHole",          "MoveBoomToRegion",
          "PositionAtHole", "SweepSearch",      "HandoverTake",    "HoleCharged",
          "FeedHose",       "WiggleHose",       "PumpEmulsionWhileRetracting", "MarkHoleCharged"};
}

void register_leaves(bt::BehaviorRegistry& registry, SimWorld& world, mission::MissionStore& store) {
  auto rig = std::make_shared<Rig>(world, store);
  auto cond = [&](const char* name, Status (Rig::*fn)(LeafContext&)) {
    registry.register_condition(name, [rig, fn](LeafContext& ctx) { return ((*rig).*fn)(ctx); });
  };
  auto act = [&](const char* name, Status (Rig::*fn)(LeafContext&), bt::FunctionAction::Halt halted = {}) {
    registry.register_stateless_action(name, [rig, fn](LeafContext& ctx) { return ((*rig).*fn)(ctx); },
                                       std::move(halted));
  };

  auto clear_flag = [](const char* port) {
    return [port](LeafContext& ctx) { ctx.output(port, false); };
  };

  cond("FaceScanned", &Rig::face_scanned);
  act("ScanFace", &Rig::scan_face);
  cond("HolesDetected", &Rig::holes_detected);
  act("DetectHoles", &Rig::detect_holes);
  cond("MissionPlanned", &Rig::mission_planned);
  act("PlanCharging", &Rig::plan_charging);

  cond("PreparationQueueEmpty", &Rig::preparation_queue_empty);
  cond("IsRobotHoldingDetonator", &Rig::holding_detonator);
  act("PeekNextHole", &Rig::peek_next);
  act("AssembleDetonator", &Rig::assemble);
  act("InsertDetonatorInHoseTip", &Rig::insert_in_tip);
  act("HandoverGive", &Rig::handover_give, clear_flag("give_ready"));

  cond("MissionQueueEmpty", &Rig::mission_queue_empty);
  act("PopHole", &Rig::pop_hole);
  cond("AtHole", &Rig::at_hole);
  act("MoveBoomToRegion", &Rig::move_boom);
  act("PositionAtHole", &Rig::position_at_hole);
  act("SweepSearch", &Rig::sweep_search);
  act("HandoverTake", &Rig::handover_take, clear_flag("take_ready"));
  cond("HoleCharged", &Rig::hole_charged);
  act("FeedHose", &Rig::feed_hose);
  act("WiggleHose", &Rig::wiggle_hose);
  act("PumpEmulsionWhileRetracting", &Rig::pump);
  act("MarkHoleCharged", &Rig::mark_charged);
}

}  // namespace chargebt::sim
