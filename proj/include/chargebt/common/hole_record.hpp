#pragma once

#include <string>
#include <vector>

namespace chargebt {

// Flat copy of a charge hole as it travels over the blackboard.
struct HoleRecord {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;
  double emulsion_target = 0.0;
  std::string detonator_type;

  bool operator==(const HoleRecord&) const = default;
};

using HoleQueue = std::vector<std::string>;

}  // namespace chargebt
