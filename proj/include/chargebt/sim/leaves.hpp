#pragma once

#include <string>
#include <vector>

#include "chargebt/bt/registry.hpp"
#include "chargebt/mission/mission.hpp"
#include "chargebt/sim/world.hpp"

namespace chargebt::sim {

// Registers every leaf used by the shipped mission trees against the world
// and the mission store. Both must outlive the registry.
void register_leaves(bt::BehaviorRegistry& registry, SimWorld& world, mission::MissionStore& store);

std::vector<std::string> leaf_names();

// A hole counts as delivered once its detonator is in the tip or the hole
// has already been pumped.
bool delivered(const SimWorld& world, const std::string& hole);

// Holes the explosive-handling arm still has to prepare, in order.
std::vector<std::string> preparation_candidates(const SimWorld& world, const mission::MissionStore& store,
                                                const std::string& current);

}  // namespace chargebt::sim
