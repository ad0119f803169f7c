#include "chargebt/fsm/phase.hpp"

namespace chargebt::fsm {

namespace {

constexpr std::array<std::string_view, 6> kPhaseNames = {"Idle",       "PreScan",  "DetectHoles",
                                                         "ChargePlan", "Charging", "MissionComplete"};
constexpr std::array<std::string_view, 8> kEventNames = {"StartMission", "ScanComplete", "NewHolesDetected",
                                                         "StartCharging", "RePlan",      "ScanAgain",
                                                         "ChargingComplete", "AssistanceResolved"};
constexpr std::array<std::string_view, 6> kResolutionNames = {"Retry",       "RePlan",   "ScanAgain",
                                                              "TeleopNudge", "SkipHole", "Abort"};

// Five transitions drawn in the mission state diagram plus the two endpoints
// into and out of the rest states.
constexpr std::array<Transition, 7> kTable = {{
    {Phase::kIdle, EventKind::kStartMission, Phase::kPreScan},
    {Phase::kPreScan, EventKind::kScanComplete, Phase::kDetectHoles},
    {Phase::kDetectHoles, EventKind::kNewHolesDetected, Phase::kChargePlan},
    {Phase::kChargePlan, EventKind::kStartCharging, Phase::kCharging},
    {Phase::kCharging, EventKind::kRePlan, Phase::kChargePlan},
    {Phase::kChargePlan, EventKind::kScanAgain, Phase::kDetectHoles},
    {Phase::kCharging, EventKind::kChargingComplete, Phase::kMissionComplete},
}};

template <class E, std::size_t N>
std::optional<E> find_name(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Phase p) noexcept { return kPhaseNames[static_cast<std::size_t>(p)]; }
std::string_view to_string(EventKind e) noexcept { return kEventNames[static_cast<std::size_t>(e)]; }
std::string_view to_string(Resolution r) noexcept { return kResolutionNames[static_cast<std::size_t>(r)]; }

std::optional<Phase> phase_from_string(std::string_view s) noexcept { return find_name<Phase>(kPhaseNames, s); }
std::optional<EventKind> event_from_string(std::string_view s) noexcept { return find_name<EventKind>(kEventNames, s); }
std::optional<Resolution> resolution_from_string(std::string_view s) noexcept {
  return find_name<Resolution>(kResolutionNames, s);
}

std::span<const Transition> transition_table() noexcept { return kTable; }

std::optional<Phase> lookup(Phase from, EventKind event) noexcept {
  for (const auto& t : kTable) {
    if (t.from == from && t.event == event) return t.to;
  }
  return std::nullopt;
}

std::optional<std::string_view> phase_tree(Phase p) noexcept {
  switch (p) {
    case Phase::kPreScan:
      return "PreScan";
    case Phase::kDetectHoles:
      return "DetectHoles";
    case Phase::kChargePlan:
      return "ChargePlan";
    case Phase::kCharging:
      return "Charging";
    case Phase::kIdle:
    case Phase::kMissionComplete:
      break;
  }
  return std::nullopt;
}

}  // namespace chargebt::fsm
