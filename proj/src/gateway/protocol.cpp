#include "chargebt/gateway/protocol.hpp"

#include <array>

#include "chargebt/gateway/codec.hpp"

namespace chargebt::gateway {

namespace {
constexpr std::array<std::string_view, 11> kNames = {
    "StartMission", "StartCharging",     "RePlan",      "ScanAgain",    "Pause",   "Resume",
    "EStop",        "ResolveAssistance", "TeleopNudge", "LoadSnapshot", "Shutdown"};
}

std::string_view to_string(CommandKind k) noexcept { return kNames[static_cast<std::size_t>(k)]; }

std::optional<CommandKind> command_kind_from_string(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == s) return static_cast<CommandKind>(i);
  }
  return std::nullopt;
}

Command command_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw BadCommand("command must be a JSON object");
  if (j.contains("v") && j["v"] != kProtocolVersion) throw BadCommand("unsupported protocol version " + j["v"].dump());
  if (!j.contains("kind") || !j["kind"].is_string()) throw BadCommand("command needs a string 'kind'");
  if (!j.contains("command_id") || !j["command_id"].is_string() || j["command_id"].get<std::string>().empty()) {
    throw BadCommand("command needs a non-empty 'command_id'");
  }
  const auto kind = command_kind_from_string(j["kind"].get<std::string>());
  if (!kind) throw BadCommand("unknown command kind '" + j["kind"].get<std::string>() + "'");
  Command c;
  c.kind = *kind;
  c.command_id = j["command_id"].get<std::string>();
  c.issued_by = j.value("issued_by", std::string("operator"));
  for (const auto& [k, v] : j.items()) {
    if (k != "v" && k != "kind" && k != "command_id" && k != "issued_by" && k != "after") c.args[k] = v;
  }
  return c;
}

nlohmann::json to_json(const Command& c) {
  nlohmann::json j = c.args;
  j["v"] = kProtocolVersion;
  j["kind"] = to_string(c.kind);
  j["command_id"] = c.command_id;
  j["issued_by"] = c.issued_by;
  return j;
}

nlohmann::json EventMsg::to_json() const {
  return {{"v", kProtocolVersion}, {"kind", kind}, {"seq", seq}, {"sim_time", sim_time}, {"payload", payload}};
}

EventMsg EventMsg::from_json(const nlohmann::json& j) {
  return {j.at("kind").get<std::string>(), j.at("seq").get<std::uint64_t>(), j.at("sim_time").get<std::uint64_t>(),
          j.value("payload", nlohmann::json::object())};
}

}  // namespace chargebt::gateway
