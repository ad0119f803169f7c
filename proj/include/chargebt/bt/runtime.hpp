#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "chargebt/bt/blackboard.hpp"
#include "chargebt/bt/registry.hpp"
#include "chargebt/bt/status.hpp"
#include "chargebt/bt/tree.hpp"

namespace chargebt::bt {

struct TraceEntry {
  std::string node_id;
  Status status;

  bool operator==(const TraceEntry&) const = default;
};

// Nodes visited by one root tick, in depth-first pre-order.
struct TickTrace {
  std::uint64_t tick = 0;
  std::vector<TraceEntry> entries;
  std::vector<std::string> keys;

  bool visited(std::string_view node_id) const;
  bool operator==(const TickTrace&) const = default;
};

struct TickResult {
  Status status;
  TickTrace trace;
};

// Mutable execution state for one compiled tree, bound to a registry and a
// blackboard. tick_root, halt and reset must not run concurrently on the
// same runtime.
class TreeRuntime {
 public:
  TreeRuntime(std::shared_ptr<const Tree> tree, const BehaviorRegistry& registry,
              Blackboard& blackboard);
  ~TreeRuntime();
  TreeRuntime(const TreeRuntime&) = delete;
  TreeRuntime& operator=(const TreeRuntime&) = delete;

  TickResult tick_root();

  // Preempts every Running node under `node_id` and clears its bookkeeping.
  // Returns the ids of the actions that received a preemption signal.
  std::vector<std::string> halt(std::string_view node_id);
  std::vector<std::string> halt_all();

  // Halts the tree and drops all per-node state. tick_count is kept.
  std::vector<std::string> reset();

  std::uint64_t tick_count() const { return tick_count_; }
  bool is_running(std::string_view node_id) const;
  bool any_running() const;
  std::vector<std::string> running_nodes() const;
  const Tree& tree() const { return *tree_; }

  // Introspection for tests.
  std::size_t memory_index(std::string_view node_id) const;
  std::size_t success_count(std::string_view node_id) const;
  int attempts(std::string_view node_id) const;

 private:
  struct NodeState {
    bool running = false;
    std::size_t child_index = 0;
    std::vector<bool> succeeded;
    std::size_t success_count = 0;
    int attempts = 0;
    std::unique_ptr<ActionNode> action;
    const ConditionHandler* condition = nullptr;
  };

  void bind();
  Status tick_node(std::size_t index);
  Status tick_sequence(std::size_t index);
  Status tick_fallback(std::size_t index);
  Status tick_memory(std::size_t index, Status continue_on);
  Status tick_parallel(std::size_t index);
  Status tick_decorator(std::size_t index);
  Status tick_action(std::size_t index);
  Status tick_condition(std::size_t index);
  void halt_node(std::size_t index);
  void halt_children_from(std::size_t index, std::size_t first_child);
  void clear_bookkeeping(NodeState& s);
  std::size_t index_of(std::string_view node_id) const;

  std::shared_ptr<const Tree> tree_;
  const BehaviorRegistry& registry_;
  Blackboard& blackboard_;
  std::vector<NodeState> states_;
  bool bound_ = false;
  std::uint64_t tick_count_ = 0;
  TickTrace* trace_ = nullptr;
  std::vector<std::string> preempted_;
};

}  // namespace chargebt::bt
