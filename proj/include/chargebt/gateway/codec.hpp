#pragma once

#include <nlohmann/json.hpp>

#include "chargebt/bt/blackboard.hpp"
#include "chargebt/bt/runtime.hpp"
#include "chargebt/fsm/orchestrator.hpp"

namespace chargebt::gateway {

inline constexpr int kProtocolVersion = 1;

nlohmann::json to_json(const bt::Value& v);
bt::Value value_from_json(bt::ValueType type, const nlohmann::json& j);

// {key: {"type": ..., "value": ...}}
nlohmann::json blackboard_to_json(const bt::Blackboard& bb);
void blackboard_from_json(const nlohmann::json& j, bt::Blackboard& bb);

nlohmann::json to_json(const bt::TickTrace& trace);
nlohmann::json to_json(const fsm::AssistancePrompt& p);
fsm::AssistancePrompt prompt_from_json(const nlohmann::json& j);

// Tree structure for UIs: nodes with kind, label and children.
nlohmann::json tree_to_json(const bt::TreeNode& root);

}  // namespace chargebt::gateway
