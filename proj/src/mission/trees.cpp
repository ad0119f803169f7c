#include "chargebt/mission/trees.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace chargebt::mission {

namespace {

using namespace bt::build;
using bt::PortBinding;
using bt::TreeNode;
using bt::ValueType;

std::vector<PortBinding> on(std::string_view key) { return {{"hole", std::string(key)}}; }

std::vector<PortBinding> handover(std::string_view hole) {
  return {{"hole", std::string(hole)}, {"give_ready", std::string(kGiveReady)}, {"take_ready", std::string(kTakeReady)}};
}

TreeNode goal(std::string id, std::string behavior, std::string label, std::vector<PortBinding> ports = {}) {
  return condition(std::move(id), std::move(behavior), std::move(ports)).labeled(std::move(label));
}

// Explosive-handling manipulator: keeps one primed detonator ahead of the
// charging arm until nothing is left to prepare.
TreeNode explosives_arm() {
  TreeNode prepare = sequence("prepare_detonator", {action("peek_next", "PeekNextHole",
                                                           {{"current", std::string(kCurrentHole)},
                                                            {"next", std::string(kPrepHole)}}),
                                                    action("assemble", "AssembleDetonator", on(kPrepHole)),
                                                    action("insert_in_tip", "InsertDetonatorInHoseTip", on(kPrepHole))})
                         .labeled("Prepare detonator!");
  TreeNode cycle = sequence("prep_cycle", {fallback("detonator_ready", {goal("holding_detonator", "IsRobotHoldingDetonator",
                                                                             "Is Robot Holding Detonator?"),
                                                                        std::move(prepare)}),
                                           action("handover_give", "HandoverGive", handover(kCurrentHole))});
  return fallback("explosives",
                  {goal("prep_queue_empty", "PreparationQueueEmpty", "PreparationQueueEmpty?", on(kCurrentHole)),
                   loop_body("prep_loop", std::move(cycle))})
      .labeled("Handle explosives");
}

// Charging manipulator and boom: pops holes until the mission queue is empty.
TreeNode charging_arm() {
  TreeNode locate = fallback("locate", {action("position_at_hole", "PositionAtHole", on(kCurrentHole)),
                                        sequence("sweep_recovery", {action("sweep_search", "SweepSearch", on(kCurrentHole)),
                                                                    action("position_after_sweep", "PositionAtHole",
                                                                           on(kCurrentHole))})});
  TreeNode position =
      fallback("position", {goal("at_hole", "AtHole", "AtHole?", on(kCurrentHole)),
                            sequence("approach", {action("move_boom", "MoveBoomToRegion", on(kCurrentHole)), std::move(locate)})})
          .labeled("Position at Hole!");

  TreeNode feed = fallback("feed", {action("feed_hose", "FeedHose", on(kCurrentHole)),
                                    retry("wiggle_retry", 3,
                                          sequence("wiggle_recovery", {action("wiggle_hose", "WiggleHose", on(kCurrentHole)),
                                                                       action("feed_after_wiggle", "FeedHose",
                                                                              on(kCurrentHole))}))});
  TreeNode charge =
      fallback("charge_hole",
               {goal("hole_charged", "HoleCharged", "HoleCharged?", on(kCurrentHole)),
                sequence("fill_hole", {std::move(feed), action("pump", "PumpEmulsionWhileRetracting", on(kCurrentHole)),
                                       action("mark_charged", "MarkHoleCharged", on(kCurrentHole))})})
          .labeled("Charge hole!");

  TreeNode cycle = sequence("charge_cycle", {action("pop_hole", "PopHole", on(kCurrentHole)), std::move(position),
                                             action("handover_take", "HandoverTake", handover(kCurrentHole)),
                                             std::move(charge)});
  return fallback("charging_arm", {goal("mission_queue_empty", "MissionQueueEmpty", "MissionQueueEmpty?", on(kCurrentHole)),
                                   loop_body("charge_loop", std::move(cycle))})
      .labeled("Charge and position");
}

TreeNode guarded(std::string id, std::string label, std::string goal_id, std::string goal_behavior,
                 std::string goal_label, std::string action_id, std::string action_behavior) {
  return fallback(std::move(id), {goal(std::move(goal_id), std::move(goal_behavior), std::move(goal_label)),
                                  action(std::move(action_id), std::move(action_behavior))})
      .labeled(std::move(label));
}

dsl::BehaviorSpec spec(std::string name, bt::BehaviorKind kind, std::vector<dsl::PortSpec> ports = {}) {
  return {std::move(name), kind, std::move(ports), {}};
}

}  // namespace

dsl::TreeDocument build_mission_trees() {
  dsl::TreeDocument doc;
  doc.blackboard = {{std::string(kCurrentHole), ValueType::kHole, {}},
                    {std::string(kPrepHole), ValueType::kHole, {}},
                    {std::string(kGiveReady), ValueType::kFlag, {}},
                    {std::string(kTakeReady), ValueType::kFlag, {}}};

  constexpr auto A = bt::BehaviorKind::kAction;
  constexpr auto C = bt::BehaviorKind::kCondition;
  const dsl::PortSpec hole{"hole", ValueType::kHole};
  const std::vector<dsl::PortSpec> one{hole};
  const std::vector<dsl::PortSpec> hand{hole, {"give_ready", ValueType::kFlag}, {"take_ready", ValueType::kFlag}};
  doc.manifest = {
      spec("FaceScanned", C),
      spec("ScanFace", A),
      spec("HolesDetected", C),
      spec("DetectHoles", A),
      spec("MissionPlanned", C),
      spec("PlanCharging", A),
      spec("PreparationQueueEmpty", C, one),
      spec("IsRobotHoldingDetonator", C),
      spec("PeekNextHole", A, {{"current", ValueType::kHole}, {"next", ValueType::kHole}}),
      spec("AssembleDetonator", A, one),
      spec("InsertDetonatorInHoseTip", A, one),
      spec("HandoverGive", A, hand),
      spec("MissionQueueEmpty", C, one),
      spec("PopHole", A, one),
      spec("AtHole", C, one),
      spec("MoveBoomToRegion", A, one),
      spec("PositionAtHole", A, one),
      spec("SweepSearch", A, one),
      spec("HandoverTake", A, hand),
      spec("HoleCharged", C, one),
      spec("FeedHose", A, one),
      spec("WiggleHose", A, one),
      spec("PumpEmulsionWhileRetracting", A, one),
      spec("MarkHoleCharged", A, one),
  };

  doc.trees.push_back({std::string(kPreScanTree),
                       guarded("prescan", "Scan working area", "face_scanned", "FaceScanned", "FaceScanned?", "scan_face",
                               "ScanFace"),
                       {}});
  doc.trees.push_back({std::string(kDetectHolesTree),
                       guarded("detect", "Detect holes", "holes_detected", "HolesDetected", "HolesDetected?",
                               "detect_holes", "DetectHoles"),
                       {}});
  doc.trees.push_back({std::string(kChargePlanTree),
                       guarded("plan", "Plan charging", "mission_planned", "MissionPlanned", "MissionPlanned?",
                               "plan_charging", "PlanCharging"),
                       {}});
  doc.trees.push_back(
      {std::string(kChargingTree), parallel("charging", {explosives_arm(), charging_arm()}).labeled("Charge holes"), {}});
  return doc;
}

namespace {

void collect(const TreeNode& n, std::set<std::string>& behaviors, std::set<std::string>& keys) {
  if (bt::is_leaf(n.kind)) behaviors.insert(n.behavior);
  for (const auto& p : n.ports) keys.insert(p.key);
  for (const auto& c : n.children) collect(c, behaviors, keys);
}

}  // namespace

dsl::TreeDocument extract_trees(const dsl::TreeDocument& doc, const std::vector<std::string>& names) {
  dsl::TreeDocument out;
  out.format_version = doc.format_version;
  std::set<std::string> behaviors;
  std::set<std::string> keys;
  for (const auto& name : names) {
    const dsl::TreeDefinition* t = doc.find_tree(name);
    if (t == nullptr) throw std::invalid_argument("no tree named '" + name + "'");
    collect(t->root, behaviors, keys);
    out.trees.push_back(*t);
  }
  for (const auto& k : doc.blackboard) {
    if (keys.count(k.key) != 0) out.blackboard.push_back(k);
  }
  for (const auto& b : doc.manifest) {
    if (behaviors.count(b.name) != 0) out.manifest.push_back(b);
  }
  return out;
}

}  // namespace chargebt::mission
