#include "chargebt/gateway/codec.hpp"

namespace chargebt::gateway {

using nlohmann::json;

json to_json(const bt::Value& v) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, HoleRecord>) {
          return {{"id", x.id},
                  {"x", x.x},
                  {"y", x.y},
                  {"depth", x.depth},
                  {"emulsion_target", x.emulsion_target},
                  {"detonator_type", x.detonator_type}};
        } else {
          return json(x);
        }
      },
      v);
}

bt::Value value_from_json(bt::ValueType type, const json& j) {
  switch (type) {
    case bt::ValueType::kInteger:
      return j.get<std::int64_t>();
    case bt::ValueType::kReal:
      return j.get<double>();
    case bt::ValueType::kString:
      return j.get<std::string>();
    case bt::ValueType::kFlag:
      return j.get<bool>();
    case bt::ValueType::kHole:
      return HoleRecord{j.at("id").get<std::string>(),         j.at("x").get<double>(),
                        j.at("y").get<double>(),               j.at("depth").get<double>(),
                        j.at("emulsion_target").get<double>(), j.at("detonator_type").get<std::string>()};
    case bt::ValueType::kHoleQueue:
      return j.get<HoleQueue>();
  }
  throw std::invalid_argument("unknown value type");
}

json blackboard_to_json(const bt::Blackboard& bb) {
  json out = json::object();
  for (const auto& [key, value] : bb.values()) {
    out[key] = {{"type", bt::to_string(bt::type_of(value))}, {"value", to_json(value)}};
  }
  return out;
}

void blackboard_from_json(const json& j, bt::Blackboard& bb) {
  bb.clear_values();
  for (const auto& [key, entry] : j.items()) {
    const auto type = bt::value_type_from_string(entry.at("type").get<std::string>());
    if (!type) throw std::invalid_argument("blackboard key '" + key + "' has an unknown type");
    bb.set(key, value_from_json(*type, entry.at("value")));
  }
}

json to_json(const bt::TickTrace& trace) {
  json entries = json::array();
  for (const auto& e : trace.entries) entries.push_back({e.node_id, bt::to_string(e.status)});
  return {{"tick", trace.tick}, {"entries", entries}, {"keys", trace.keys}};
}

json to_json(const fsm::AssistancePrompt& p) {
  json resolutions = json::array();
  for (auto r : p.resolutions) resolutions.push_back(fsm::to_string(r));
  return {{"phase", fsm::to_string(p.phase)},
          {"node_id", p.node_id},
          {"label", p.label},
          {"leaf_id", p.leaf_id},
          {"hole_id", p.hole_id.empty() ? json(nullptr) : json(p.hole_id)},
          {"reason", p.reason},
          {"resolutions", resolutions},
          {"tick", p.tick}};
}

fsm::AssistancePrompt prompt_from_json(const json& j) {
  fsm::AssistancePrompt p;
  p.phase = fsm::phase_from_string(j.at("phase").get<std::string>()).value();
  p.node_id = j.at("node_id").get<std::string>();
  p.label = j.at("label").get<std::string>();
  p.leaf_id = j.at("leaf_id").get<std::string>();
  p.hole_id = j.at("hole_id").is_null() ? std::string() : j["hole_id"].get<std::string>();
  p.reason = j.value("reason", std::string());
  for (const auto& r : j.at("resolutions")) p.resolutions.push_back(fsm::resolution_from_string(r.get<std::string>()).value());
  p.tick = j.value("tick", std::uint64_t{0});
  return p;
}

json tree_to_json(const bt::TreeNode& n) {
  json out = {{"id", n.id}, {"kind", bt::to_string(n.kind)}, {"label", n.label.empty() ? (n.behavior.empty() ? n.id : n.behavior) : n.label}};
  switch (n.kind) {
    case bt::NodeKind::kSequence:
    case bt::NodeKind::kFallback:
      out["memory"] = n.memory;
      break;
    case bt::NodeKind::kParallel:
      out["success_threshold"] = n.success_threshold ? json(*n.success_threshold) : json("all");
      break;
    case bt::NodeKind::kDecorator:
      out["decorator"] = bt::to_string(n.decorator);
      if (n.decorator == bt::DecoratorKind::kRetryUntilSuccessful) out["max_attempts"] = n.max_attempts;
      break;
    case bt::NodeKind::kAction:
    case bt::NodeKind::kCondition:
      out["behavior"] = n.behavior;
      break;
  }
  json children = json::array();
  for (const auto& c : n.children) children.push_back(tree_to_json(c));
  out["children"] = children;
  return out;
}

}  // namespace chargebt::gateway
