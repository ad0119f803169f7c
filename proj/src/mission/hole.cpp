#include "chargebt/mission/hole.hpp"

#include <array>

namespace chargebt::mission {

namespace {
constexpr std::array<std::string_view, 6> kNames = {"Detected", "Planned", "Charging", "Charged", "Failed", "Skipped"};
}

std::string_view to_string(HoleState s) noexcept { return kNames[static_cast<std::size_t>(s)]; }

std::optional<HoleState> hole_state_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == s) return static_cast<HoleState>(i);
  }
  return std::nullopt;
}

bool is_lifecycle_edge(HoleState from, HoleState to) noexcept {
  using enum HoleState;
  switch (from) {
    case kDetected:
      return to == kPlanned;
    case kPlanned:
      return to == kCharging;
    case kCharging:
      return to == kCharged || to == kFailed;
    case kFailed:
      return to == kSkipped || to == kCharging;
    case kCharged:
    case kSkipped:
      return false;
  }
  return false;
}

bool is_reopen_edge(HoleState from, HoleState to) noexcept {
  using enum HoleState;
  return to == kDetected && (from == kPlanned || from == kCharging || from == kFailed);
}

bool is_terminal(HoleState s) noexcept { return s == HoleState::kCharged || s == HoleState::kSkipped; }

}  // namespace chargebt::mission
