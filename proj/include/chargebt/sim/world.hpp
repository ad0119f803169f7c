#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "chargebt/sim/scenario.hpp"

namespace chargebt::sim {

inline constexpr int kSnapshotVersion = 1;

class IncompatibleSnapshotVersion : public std::runtime_error {
 public:
  explicit IncompatibleSnapshotVersion(const std::string& found)
      : std::runtime_error("snapshot version " + found + " is not supported (expected " +
                           std::to_string(kSnapshotVersion) + ")") {}
};

// A timed motion in progress on one actuator. Progress survives halts; a
// different task on the same actuator starts over.
struct Motion {
  std::string task;
  int elapsed = 0;

  bool operator==(const Motion&) const = default;
};

struct HoseState {
  std::string hole;     // hole the deployed length belongs to
  double length = 0.0;  // m
  std::string fed_for;  // fully fed into this hole
  std::optional<double> blocked_at;
  bool unrecoverable = false;

  bool operator==(const HoseState&) const = default;
};

struct SecondaryState {
  bool holding_detonator = false;
  std::string target;   // hole being prepared
  bool primed = false;  // assembled detonator waiting to go into the tip

  bool operator==(const SecondaryState&) const = default;
};

struct WorldState {
  std::uint64_t sim_time = 0;
  bool face_scanned = false;
  bool holes_detected = false;
  bool mission_planned = false;
  int detect_rounds = 0;

  std::string boom_region;
  std::string tool_at;
  std::map<std::string, Motion> motions;  // by actuator
  HoseState hose;
  SecondaryState secondary;
  std::string tip_loaded_for;
  int inventory = 0;

  std::map<std::string, std::int64_t> pumped_g;  // grams, never decreases
  std::map<std::string, int> pump_count;
  std::set<std::string> lost;             // hole not visible from the approach pose
  std::set<std::string> approach_failed;  // last approach rejected; needs a sweep or a nudge
  std::set<std::string> approached;
  std::set<std::string> blockage_drawn;
  std::map<std::string, std::uint64_t> rng_counters;
  std::set<std::size_t> fired_faults;
  std::string last_failure_hole;
  std::string last_failure;

  bool operator==(const WorldState&) const = default;
};

// Deterministic rig and rock-face model. All randomness is keyed by
// (seed, channel, hole, counter) so the draws do not depend on tick timing.
class SimWorld {
 public:
  explicit SimWorld(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  WorldState& state() { return state_; }
  const WorldState& state() const { return state_; }

  void step(std::uint64_t ticks = 1);

  // Advances a timed motion by one tick; true when it just completed.
  bool advance(const std::string& actuator, const std::string& task, int duration);

  // Next uniform draw in [0, 1) from a named channel.
  double draw(std::string_view channel, std::string_view hole);
  bool chance(std::string_view channel, std::string_view hole, double p);
  double gaussian(std::string_view channel, std::string_view hole, double sigma);

  // First unfired scripted fault of `kind` matching the hole (or due by tick);
  // marks it fired.
  const ScriptedFault* take_fault(FaultKind kind, std::string_view hole);

  const TruthHole* truth(std::string_view id) const;
  std::string region_of(double x, double y) const;

  std::int64_t total_pumped_g() const;

  nlohmann::json snapshot() const;
  // Throws IncompatibleSnapshotVersion.
  void restore(const nlohmann::json& snapshot);
  std::uint64_t state_hash() const;

 private:
  Scenario scenario_;
  WorldState state_;
};

std::int64_t to_grams(double kg);

}  // namespace chargebt::sim
