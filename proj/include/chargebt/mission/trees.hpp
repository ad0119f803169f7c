#pragma once

#include <string_view>
#include <vector>

#include "chargebt/dsl/document.hpp"

namespace chargebt::mission {

inline constexpr std::string_view kPreScanTree = "PreScan";
inline constexpr std::string_view kDetectHolesTree = "DetectHoles";
inline constexpr std::string_view kChargePlanTree = "ChargePlan";
inline constexpr std::string_view kChargingTree = "Charging";

// Blackboard keys shared by the phase trees.
inline constexpr std::string_view kCurrentHole = "current_hole";
inline constexpr std::string_view kPrepHole = "prep_hole";
inline constexpr std::string_view kGiveReady = "give_ready";
inline constexpr std::string_view kTakeReady = "take_ready";

// The four phase trees with their blackboard schema and behavior manifest.
dsl::TreeDocument build_mission_trees();

// Subset of `doc` holding the named trees and only the keys and behaviors
// they reference.
dsl::TreeDocument extract_trees(const dsl::TreeDocument& doc, const std::vector<std::string>& names);

}  // namespace chargebt::mission
