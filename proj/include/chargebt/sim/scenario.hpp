#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "chargebt/mission/mission.hpp"

namespace chargebt::sim {

class InvalidScenario : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FaultKind : std::uint8_t {
  kHoleNotFound,
  kSweepFails,
  kHoseBlockage,
  kUnrecoverableBlockage,
  kDetonatorDrop,
  kPoseOffset,
};

std::string_view to_string(FaultKind k) noexcept;
std::optional<FaultKind> fault_kind_from_string(std::string_view s) noexcept;

// Fires once, either for a named hole or at the first opportunity from a tick on.
struct ScriptedFault {
  FaultKind kind = FaultKind::kHoleNotFound;
  std::optional<std::string> hole;
  std::optional<std::uint64_t> tick;
  double depth = 0.0;  // blockages
  double dx = 0.0;     // pose offset
  double dy = 0.0;
};

struct FaultConfig {
  double p_hole_not_found_at_approach = 0.0;
  double p_sweep_recovery_success = 0.9;
  double p_hose_blockage_per_hole = 0.0;
  double p_wiggle_clears_blockage = 0.8;
  double p_detonator_drop = 0.0;
  std::vector<ScriptedFault> scripted_faults;
};

// Durations are in ticks; rates are per tick.
struct Timings {
  int scan_ticks = 20;
  int detect_ticks = 20;
  int plan_ticks = 5;
  int boom_move_ticks = 30;
  int approach_ticks = 10;
  int sweep_ticks = 15;
  int assemble_ticks = 12;
  int insert_ticks = 4;
  int handover_ticks = 5;
  int wiggle_ticks = 6;
  double feed_rate = 0.5;  // m
  double pump_rate = 0.25; // kg
};

struct RigParams {
  double position_tolerance = 0.03;  // m
  double sweep_radius = 0.03;        // m
  double detection_noise = 0.005;    // m, standard deviation per axis
  double hose_max = 6.0;             // m
  double region_width = 2.0;         // boom working region on the face, m
  double region_height = 2.0;
  int detonator_inventory = 200;
};

struct TruthHole {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;
  std::array<double, 3> collar_direction{0.0, 0.0, 1.0};
};

struct Scenario {
  std::string name = "scenario";
  double face_width = 6.0;
  double face_height = 5.0;
  std::vector<TruthHole> holes;
  FaultConfig fault_config;
  std::uint64_t seed = 0;
  Timings timings;
  RigParams rig;
  mission::PlanParams plan;
};

// Throws InvalidScenario with the offending field named.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);
nlohmann::json scenario_to_json(const Scenario& s);

}  // namespace chargebt::sim
