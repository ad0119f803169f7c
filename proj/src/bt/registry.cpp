#include "chargebt/bt/registry.hpp"

#include "chargebt/bt/errors.hpp"

namespace chargebt::bt {

std::string_view LeafContext::key_for(std::string_view port) const {
  for (const PortBinding& b : node_.ports) {
    if (b.port == port) return b.key;
  }
  return port;
}

void BehaviorRegistry::register_behavior(const std::string& name, BehaviorHandler handler) {
  if (handlers_.count(name) != 0) throw DuplicateName(name);
  handlers_.emplace(name, std::move(handler));
}

void BehaviorRegistry::register_stateless_action(const std::string& name, FunctionAction::Tick tick,
                                                 FunctionAction::Halt halted) {
  register_action(name, [tick = std::move(tick), halted = std::move(halted)] {
    return std::make_unique<FunctionAction>(tick, tick, halted);
  });
}

const BehaviorHandler* BehaviorRegistry::find(std::string_view name) const {
  auto it = handlers_.find(name);
  return it == handlers_.end() ? nullptr : &it->second;
}

std::vector<std::string> BehaviorRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(handlers_.size());
  for (const auto& [name, _] : handlers_) out.push_back(name);
  return out;
}

}  // namespace chargebt::bt
