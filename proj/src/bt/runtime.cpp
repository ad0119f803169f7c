#include "chargebt/bt/runtime.hpp"

#include <algorithm>

#include "chargebt/bt/errors.hpp"

namespace chargebt::bt {

bool TickTrace::visited(std::string_view node_id) const {
  return std::any_of(entries.begin(), entries.end(), [&](const TraceEntry& e) { return e.node_id == node_id; });
}

TreeRuntime::TreeRuntime(std::shared_ptr<const Tree> tree, const BehaviorRegistry& registry,
                         Blackboard& blackboard)
    : tree_(std::move(tree)), registry_(registry), blackboard_(blackboard), states_(tree_->size()) {}

TreeRuntime::~TreeRuntime() = default;

void TreeRuntime::bind() {
  for (std::size_t i = 0; i < tree_->size(); ++i) {
    const Tree::Node& n = tree_->node(i);
    if (!is_leaf(n.kind)) continue;
    const BehaviorHandler* handler = registry_.find(n.behavior);
    if (handler == nullptr) throw UnregisteredBehavior(n.id, n.behavior);
    const BehaviorKind expected = n.kind == NodeKind::kAction ? BehaviorKind::kAction : BehaviorKind::kCondition;
    if (kind_of(*handler) != expected) {
      throw MalformedTree("node '" + n.id + "' uses behavior '" + n.behavior + "' of the wrong kind");
    }
    if (n.kind == NodeKind::kAction) {
      states_[i].action = std::get<ActionFactory>(*handler)();
    } else {
      states_[i].condition = &std::get<ConditionHandler>(*handler);
    }
  }
  bound_ = true;
}

TickResult TreeRuntime::tick_root() {
  if (!bound_) bind();
  TickResult result{Status::kFailure, {}};
  result.trace.tick = tick_count_++;
  blackboard_.begin_access_log();
  trace_ = &result.trace;
  try {
    result.status = tick_node(0);
  } catch (...) {
    trace_ = nullptr;
    throw;
  }
  trace_ = nullptr;
  result.trace.keys = blackboard_.touched_keys();
  return result;
}

Status TreeRuntime::tick_node(std::size_t index) {
  const Tree::Node& n = tree_->node(index);
  const std::size_t slot = trace_->entries.size();
  trace_->entries.push_back({n.id, Status::kRunning});

  Status s = Status::kFailure;
  switch (n.kind) {
    case NodeKind::kSequence:
      s = n.memory ? tick_memory(index, Status::kSuccess) : tick_sequence(index);
      break;
    case NodeKind::kFallback:
      s = n.memory ? tick_memory(index, Status::kFailure) : tick_fallback(index);
      break;
    case NodeKind::kParallel:
      s = tick_parallel(index);
      break;
    case NodeKind::kDecorator:
      s = tick_decorator(index);
      break;
    case NodeKind::kAction:
      s = tick_action(index);
      break;
    case NodeKind::kCondition:
      s = tick_condition(index);
      break;
  }

  trace_->entries[slot].status = s;
  NodeState& st = states_[index];
  st.running = s == Status::kRunning;
  if (!st.running) clear_bookkeeping(st);
  return s;
}

Status TreeRuntime::tick_sequence(std::size_t index) {
  const auto& children = tree_->node(index).children;
  for (std::size_t k = 0; k < children.size(); ++k) {
    const Status s = tick_node(children[k]);
    if (s != Status::kSuccess) {
      halt_children_from(index, k + 1);
      return s;
    }
  }
  return Status::kSuccess;
}

Status TreeRuntime::tick_fallback(std::size_t index) {
  const auto& children = tree_->node(index).children;
  for (std::size_t k = 0; k < children.size(); ++k) {
    const Status s = tick_node(children[k]);
    if (s != Status::kFailure) {
      halt_children_from(index, k + 1);
      return s;
    }
  }
  return Status::kFailure;
}

// Memory Sequence (continue_on = Success) and memory Fallback (continue_on =
// Failure): resume at the stored child; completed children are not revisited.
Status TreeRuntime::tick_memory(std::size_t index, Status continue_on) {
  const auto& children = tree_->node(index).children;
  NodeState& st = states_[index];
  for (std::size_t k = st.child_index; k < children.size(); ++k) {
    const Status s = tick_node(children[k]);
    if (s == continue_on) continue;
    if (s == Status::kRunning) st.child_index = k;
    return s;
  }
  return continue_on;
}

Status TreeRuntime::tick_parallel(std::size_t index) {
  const Tree::Node& n = tree_->node(index);
  NodeState& st = states_[index];
  if (st.succeeded.size() != n.children.size()) st.succeeded.assign(n.children.size(), false);

  for (std::size_t k = 0; k < n.children.size(); ++k) {
    if (st.succeeded[k]) continue;
    const Status s = tick_node(n.children[k]);
    if (s == Status::kRunning) continue;
    if (s == Status::kSuccess) {
      st.succeeded[k] = true;
      if (++st.success_count < n.success_threshold) continue;
    }
    // First decisive result in declaration order wins.
    for (std::size_t c : n.children) halt_node(c);
    return s;
  }
  return Status::kRunning;
}

Status TreeRuntime::tick_decorator(std::size_t index) {
  const Tree::Node& n = tree_->node(index);
  NodeState& st = states_[index];
  const Status s = tick_node(n.children.front());
  switch (n.decorator) {
    case DecoratorKind::kInverter:
      if (s == Status::kSuccess) return Status::kFailure;
      if (s == Status::kFailure) return Status::kSuccess;
      return s;
    case DecoratorKind::kRetryUntilSuccessful:
      if (s != Status::kFailure) return s;
      if (++st.attempts >= n.max_attempts) return Status::kFailure;
      return Status::kRunning;
    case DecoratorKind::kLoopBody:
      if (s == Status::kSuccess) {
        halt_node(n.children.front());
        return Status::kRunning;
      }
      return s;
  }
  return s;
}

Status TreeRuntime::tick_action(std::size_t index) {
  const Tree::Node& n = tree_->node(index);
  NodeState& st = states_[index];
  LeafContext ctx(n, blackboard_, trace_->tick);
  return st.running ? st.action->on_running(ctx) : st.action->on_start(ctx);
}

Status TreeRuntime::tick_condition(std::size_t index) {
  const Tree::Node& n = tree_->node(index);
  LeafContext ctx(n, blackboard_, trace_->tick);
  const Status s = (*states_[index].condition)(ctx);
  if (s == Status::kRunning) throw ConditionReturnedRunning(n.id);
  return s;
}

void TreeRuntime::halt_children_from(std::size_t index, std::size_t first_child) {
  const auto& children = tree_->node(index).children;
  for (std::size_t k = first_child; k < children.size(); ++k) halt_node(children[k]);
}

void TreeRuntime::halt_node(std::size_t index) {
  NodeState& st = states_[index];
  if (!st.running) return;
  const Tree::Node& n = tree_->node(index);
  if (n.kind == NodeKind::kAction) {
    LeafContext ctx(n, blackboard_, tick_count_);
    st.action->on_halted(ctx);
    preempted_.push_back(n.id);
  } else {
    for (std::size_t c : n.children) halt_node(c);
  }
  st.running = false;
  clear_bookkeeping(st);
}

void TreeRuntime::clear_bookkeeping(NodeState& s) {
  s.child_index = 0;
  s.succeeded.clear();
  s.success_count = 0;
  s.attempts = 0;
}

std::size_t TreeRuntime::index_of(std::string_view node_id) const {
  const auto idx = tree_->find(node_id);
  if (!idx) throw UnknownNodeId(std::string(node_id));
  return *idx;
}

std::vector<std::string> TreeRuntime::halt(std::string_view node_id) {
  const std::size_t index = index_of(node_id);
  preempted_.clear();
  halt_node(index);
  return std::exchange(preempted_, {});
}

std::vector<std::string> TreeRuntime::halt_all() { return halt(tree_->node(0).id); }

std::vector<std::string> TreeRuntime::reset() {
  auto preempted = bound_ ? halt_all() : std::vector<std::string>{};
  for (std::size_t i = 0; i < states_.size(); ++i) {
    states_[i].running = false;
    clear_bookkeeping(states_[i]);
    states_[i].action.reset();
    states_[i].condition = nullptr;
  }
  bound_ = false;
  return preempted;
}

bool TreeRuntime::is_running(std::string_view node_id) const { return states_[index_of(node_id)].running; }

bool TreeRuntime::any_running() const {
  return std::any_of(states_.begin(), states_.end(), [](const NodeState& s) { return s.running; });
}

std::vector<std::string> TreeRuntime::running_nodes() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].running) out.push_back(tree_->node(i).id);
  }
  return out;
}

std::size_t TreeRuntime::memory_index(std::string_view node_id) const { return states_[index_of(node_id)].child_index; }
std::size_t TreeRuntime::success_count(std::string_view node_id) const {
  return states_[index_of(node_id)].success_count;
}
int TreeRuntime::attempts(std::string_view node_id) const { return states_[index_of(node_id)].attempts; }

}  // namespace chargebt::bt
