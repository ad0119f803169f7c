#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "chargebt/common/hole_record.hpp"

namespace chargebt::mission {

enum class HoleState : std::uint8_t { kDetected, kPlanned, kCharging, kCharged, kFailed, kSkipped };

std::string_view to_string(HoleState s) noexcept;
std::optional<HoleState> hole_state_from_string(std::string_view s) noexcept;

// Lifecycle edges: Detected->Planned->Charging->{Charged|Failed},
// Failed->{Skipped|Charging}. Re-planning may also send a Planned, Charging
// or Failed hole back to Detected.
bool is_lifecycle_edge(HoleState from, HoleState to) noexcept;
bool is_reopen_edge(HoleState from, HoleState to) noexcept;
bool is_terminal(HoleState s) noexcept;

struct ChargeHole {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;
  std::array<double, 3> collar_direction{0.0, 0.0, 1.0};
  HoleState state = HoleState::kDetected;
  double emulsion_target = 0.0;
  std::string detonator_type;

  HoleRecord record() const { return {id, x, y, depth, emulsion_target, detonator_type}; }
  bool operator==(const ChargeHole&) const = default;
};

}  // namespace chargebt::mission
