#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace chargebt::gateway {

enum class CommandKind : std::uint8_t {
  kStartMission,
  kStartCharging,
  kRePlan,
  kScanAgain,
  kPause,
  kResume,
  kEStop,
  kResolveAssistance,
  kTeleopNudge,
  kLoadSnapshot,
  kShutdown,
};

std::string_view to_string(CommandKind k) noexcept;
std::optional<CommandKind> command_kind_from_string(std::string_view s) noexcept;

class BadCommand : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Wire form: {"v":1, "kind":..., "command_id":..., "issued_by":..., ...args}.
struct Command {
  CommandKind kind = CommandKind::kStartMission;
  std::string command_id;
  std::string issued_by;
  nlohmann::json args = nlohmann::json::object();
};

// Throws BadCommand. A missing command_id is an error.
Command command_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Command& c);

// Wire form: {"v":1, "kind":..., "seq":..., "sim_time":..., "payload":{...}}.
struct EventMsg {
  std::string kind;
  std::uint64_t seq = 0;
  std::uint64_t sim_time = 0;
  nlohmann::json payload = nlohmann::json::object();

  nlohmann::json to_json() const;
  static EventMsg from_json(const nlohmann::json& j);
};

namespace events {
inline constexpr std::string_view kPhaseChanged = "PhaseChanged";
inline constexpr std::string_view kTickTraceBatch = "TickTraceBatch";
inline constexpr std::string_view kHoleUpdated = "HoleUpdated";
inline constexpr std::string_view kMissionUpdated = "MissionUpdated";
inline constexpr std::string_view kPromptRaised = "AssistancePromptRaised";
inline constexpr std::string_view kPromptCleared = "AssistancePromptCleared";
inline constexpr std::string_view kSnapshotWritten = "SnapshotWritten";
inline constexpr std::string_view kCommandAck = "CommandAck";
inline constexpr std::string_view kResyncState = "ResyncState";
inline constexpr std::string_view kHeartbeat = "Heartbeat";
inline constexpr std::string_view kRunStateChanged = "RunStateChanged";
}  // namespace events

}  // namespace chargebt::gateway
