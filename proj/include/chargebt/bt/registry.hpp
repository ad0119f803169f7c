#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chargebt/bt/blackboard.hpp"
#include "chargebt/bt/status.hpp"
#include "chargebt/bt/tree.hpp"

namespace chargebt::bt {

// What a leaf sees while it is being ticked or halted.
class LeafContext {
 public:
  LeafContext(const Tree::Node& node, Blackboard& blackboard, std::uint64_t tick)
      : node_(node), blackboard_(blackboard), tick_(tick) {}

  const std::string& node_id() const { return node_.id; }
  const std::string& label() const { return node_.label; }
  std::uint64_t tick() const { return tick_; }
  Blackboard& blackboard() { return blackboard_; }

  // Blackboard key bound to `port`; an unbound port maps to a key of the
  // same name.
  std::string_view key_for(std::string_view port) const;

  template <class T>
  const T& input(std::string_view port) const {
    return blackboard_.get_as<T>(key_for(port));
  }
  bool has_input(std::string_view port) const { return blackboard_.contains(key_for(port)); }
  void output(std::string_view port, Value value) { blackboard_.set(key_for(port), std::move(value)); }
  void clear_output(std::string_view port) { blackboard_.erase(key_for(port)); }

 private:
  const Tree::Node& node_;
  Blackboard& blackboard_;
  std::uint64_t tick_;
};

// A long-running leaf. One instance exists per Action node in a runtime.
// on_start is called on the first tick after the node was Idle, on_running on
// later ticks while it keeps returning Running, and on_halted exactly once when
// a Running node is preempted.
class ActionNode {
 public:
  virtual ~ActionNode() = default;
  virtual Status on_start(LeafContext& ctx) = 0;
  virtual Status on_running(LeafContext& ctx) = 0;
  virtual void on_halted(LeafContext& ctx) { (void)ctx; }
};

using ActionFactory = std::function<std::unique_ptr<ActionNode>()>;
// Must return Success or Failure.
using ConditionHandler = std::function<Status(LeafContext&)>;
using BehaviorHandler = std::variant<ActionFactory, ConditionHandler>;

enum class BehaviorKind : std::uint8_t { kAction, kCondition };

// Action built from callables; handy for leaves that keep their state
// elsewhere (the simulator) or for tests.
class FunctionAction final : public ActionNode {
 public:
  using Tick = std::function<Status(LeafContext&)>;
  using Halt = std::function<void(LeafContext&)>;

  FunctionAction(Tick start, Tick running, Halt halted = {})
      : start_(std::move(start)), running_(std::move(running)), halted_(std::move(halted)) {}

  Status on_start(LeafContext& ctx) override { return start_(ctx); }
  Status on_running(LeafContext& ctx) override { return running_(ctx); }
  void on_halted(LeafContext& ctx) override {
    if (halted_) halted_(ctx);
  }

 private:
  Tick start_;
  Tick running_;
  Halt halted_;
};

class BehaviorRegistry {
 public:
  void register_behavior(const std::string& name, BehaviorHandler handler);
  void register_action(const std::string& name, ActionFactory factory) {
    register_behavior(name, BehaviorHandler{std::move(factory)});
  }
  void register_condition(const std::string& name, ConditionHandler handler) {
    register_behavior(name, BehaviorHandler{std::move(handler)});
  }
  // Same callable on start and on every poll.
  void register_stateless_action(const std::string& name, FunctionAction::Tick tick,
                                 FunctionAction::Halt halted = {});

  const BehaviorHandler* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  std::vector<std::string> names() const;

 private:
  std::map<std::string, BehaviorHandler, std::less<>> handlers_;
};

constexpr BehaviorKind kind_of(const BehaviorHandler& h) noexcept {
  return h.index() == 0 ? BehaviorKind::kAction : BehaviorKind::kCondition;
}

}  // namespace chargebt::bt
