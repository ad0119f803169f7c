#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chargebt/bt/blackboard.hpp"
#include "chargebt/mission/errors.hpp"
#include "chargebt/mission/hole.hpp"

namespace chargebt::mission {

inline constexpr std::size_t kMaxHoles = 100;

struct PlanParams {
  double linear_density = 1.0;  // kg of emulsion per metre of hole
  std::string detonator_type = "standard";
  double row_tolerance = 0.25;  // m; collars closer than this in y share a row
  // Operator override of the charging order; must list every planned hole.
  std::vector<std::string> order;
};

struct HolePlan {
  double emulsion_target = 0.0;
  std::string detonator_type;

  bool operator==(const HolePlan&) const = default;
};

struct ChargingMission {
  std::string mission_id;
  int revision = 0;
  std::string created_by;
  std::vector<std::string> order;  // as planned
  std::vector<std::string> queue;  // still to pop
  std::map<std::string, HolePlan> plan;

  bool operator==(const ChargingMission&) const = default;
};

// Orders Detected holes bottom row first, then left to right, then by id, and
// marks them Planned. Throws EmptyHoleSet or TooManyHoles.
ChargingMission plan_mission(std::vector<ChargeHole*> holes, const PlanParams& params, std::string mission_id,
                             int revision, std::string created_by);

// Hole book plus the current mission. Every state change goes through here so
// the lifecycle edges are enforced in one place.
class MissionStore {
 public:
  const std::vector<ChargeHole>& holes() const { return holes_; }
  const ChargeHole* find(std::string_view id) const;
  const ChargeHole& hole(std::string_view id) const;
  void add(ChargeHole hole);

  // Throws InvalidHoleTransition for edges outside the lifecycle.
  void set_state(std::string_view id, HoleState to);
  // Sends a non-terminal hole back to Detected ahead of a re-plan.
  void reopen(std::string_view id);
  void update_estimate(std::string_view id, double x, double y);

  const std::optional<ChargingMission>& mission() const { return mission_; }
  const ChargingMission& current_mission() const;
  const ChargingMission& plan(const PlanParams& params, const std::string& created_by);
  void clear();

  std::vector<std::string>& queue();

  bool operator==(const MissionStore&) const = default;

  friend void to_json(nlohmann::json& j, const MissionStore& s);
  friend void from_json(const nlohmann::json& j, MissionStore& s);

 private:
  ChargeHole& mutable_hole(std::string_view id);

  std::vector<ChargeHole> holes_;
  std::optional<ChargingMission> mission_;
  int revisions_ = 0;
};

// Removes the queue head, moves it to Charging and writes its record to the
// blackboard key. Throws EmptyQueue.
ChargeHole pop_next(MissionStore& store, bt::Blackboard& blackboard, std::string_view key = "current_hole");
std::optional<ChargeHole> peek_next(const MissionStore& store);

// Mission files: {mission_id, revision, holes:[...], order:[ids]}.
nlohmann::json mission_to_json(const MissionStore& store);
MissionStore mission_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const ChargeHole& h);
void from_json(const nlohmann::json& j, ChargeHole& h);
void to_json(nlohmann::json& j, const ChargingMission& m);
void from_json(const nlohmann::json& j, ChargingMission& m);

}  // namespace chargebt::mission
