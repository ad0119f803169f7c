#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chargebt::fsm {

enum class Phase : std::uint8_t { kIdle, kPreScan, kDetectHoles, kChargePlan, kCharging, kMissionComplete };

enum class EventKind : std::uint8_t {
  kStartMission,
  kScanComplete,
  kNewHolesDetected,
  kStartCharging,
  kRePlan,
  kScanAgain,
  kChargingComplete,
  kAssistanceResolved,
};

enum class Resolution : std::uint8_t { kRetry, kRePlan, kScanAgain, kTeleopNudge, kSkipHole, kAbort };

inline constexpr std::array kAllPhases = {Phase::kIdle,       Phase::kPreScan,  Phase::kDetectHoles,
                                          Phase::kChargePlan, Phase::kCharging, Phase::kMissionComplete};
inline constexpr std::array kAllEvents = {EventKind::kStartMission,     EventKind::kScanComplete,
                                          EventKind::kNewHolesDetected, EventKind::kStartCharging,
                                          EventKind::kRePlan,           EventKind::kScanAgain,
                                          EventKind::kChargingComplete, EventKind::kAssistanceResolved};

std::string_view to_string(Phase p) noexcept;
std::string_view to_string(EventKind e) noexcept;
std::string_view to_string(Resolution r) noexcept;
std::optional<Phase> phase_from_string(std::string_view s) noexcept;
std::optional<EventKind> event_from_string(std::string_view s) noexcept;
std::optional<Resolution> resolution_from_string(std::string_view s) noexcept;

struct Transition {
  Phase from;
  EventKind event;
  Phase to;
};

std::span<const Transition> transition_table() noexcept;
std::optional<Phase> lookup(Phase from, EventKind event) noexcept;

// Name of the tree run in `p`; none for Idle and MissionComplete.
std::optional<std::string_view> phase_tree(Phase p) noexcept;

class FsmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RejectedEvent : public FsmError {
 public:
  RejectedEvent(Phase phase, EventKind event, const std::string& why = "invalid transition")
      : FsmError(why + ": " + std::string(to_string(event)) + " in " + std::string(to_string(phase))),
        phase_(phase),
        event_(event),
        reason_(why) {}

  Phase phase() const noexcept { return phase_; }
  EventKind event() const noexcept { return event_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  Phase phase_;
  EventKind event_;
  std::string reason_;
};

class NotRunning : public FsmError {
 public:
  explicit NotRunning(Phase p) : FsmError("no phase tree is running in " + std::string(to_string(p))) {}
};

class NotPaused : public FsmError {
 public:
  NotPaused() : FsmError("not paused") {}
};

class NoActivePrompt : public FsmError {
 public:
  NoActivePrompt() : FsmError("no assistance prompt is active") {}
};

class InvalidResolutionForPhase : public FsmError {
 public:
  InvalidResolutionForPhase(Resolution r, Phase p)
      : FsmError(std::string(to_string(r)) + " is not offered in " + std::string(to_string(p))) {}
};

}  // namespace chargebt::fsm
