#include "chargebt/bt/tree.hpp"

#include "chargebt/bt/errors.hpp"

namespace chargebt::bt {

std::string_view to_string(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::kSequence:
      return "Sequence";
    case NodeKind::kFallback:
      return "Fallback";
    case NodeKind::kParallel:
      return "Parallel";
    case NodeKind::kDecorator:
      return "Decorator";
    case NodeKind::kAction:
      return "Action";
    case NodeKind::kCondition:
      return "Condition";
  }
  return "Sequence";
}

std::string_view to_string(DecoratorKind k) noexcept {
  switch (k) {
    case DecoratorKind::kInverter:
      return "Inverter";
    case DecoratorKind::kRetryUntilSuccessful:
      return "RetryUntilSuccessful";
    case DecoratorKind::kLoopBody:
      return "LoopBody";
  }
  return "Inverter";
}

std::optional<DecoratorKind> decorator_from_string(std::string_view s) noexcept {
  for (auto k : {DecoratorKind::kInverter, DecoratorKind::kRetryUntilSuccessful, DecoratorKind::kLoopBody}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool operator==(const TreeNode& a, const TreeNode& b) {
  if (a.kind != b.kind || a.id != b.id || a.label != b.label || a.children != b.children) return false;
  switch (a.kind) {
    case NodeKind::kSequence:
    case NodeKind::kFallback:
      return a.memory == b.memory;
    case NodeKind::kParallel:
      return a.success_threshold == b.success_threshold;
    case NodeKind::kDecorator:
      return a.decorator == b.decorator &&
             (a.decorator != DecoratorKind::kRetryUntilSuccessful || a.max_attempts == b.max_attempts);
    case NodeKind::kAction:
    case NodeKind::kCondition:
      return a.behavior == b.behavior && a.ports == b.ports;
  }
  return false;
}

namespace build {

namespace {
TreeNode control(NodeKind kind, std::string id, std::vector<TreeNode> children, bool memory) {
  TreeNode n;
  n.kind = kind;
  n.id = std::move(id);
  n.memory = memory;
  n.children = std::move(children);
  return n;
}

TreeNode decorator(DecoratorKind kind, std::string id, TreeNode child) {
  TreeNode n;
  n.kind = NodeKind::kDecorator;
  n.decorator = kind;
  n.id = std::move(id);
  n.children.push_back(std::move(child));
  return n;
}

TreeNode leaf(NodeKind kind, std::string id, std::string behavior, std::vector<PortBinding> ports) {
  TreeNode n;
  n.kind = kind;
  n.id = std::move(id);
  n.behavior = std::move(behavior);
  n.ports = std::move(ports);
  return n;
}
}  // namespace

TreeNode sequence(std::string id, std::vector<TreeNode> children) {
  return control(NodeKind::kSequence, std::move(id), std::move(children), false);
}
TreeNode memory_sequence(std::string id, std::vector<TreeNode> children) {
  return control(NodeKind::kSequence, std::move(id), std::move(children), true);
}
TreeNode fallback(std::string id, std::vector<TreeNode> children) {
  return control(NodeKind::kFallback, std::move(id), std::move(children), false);
}
TreeNode memory_fallback(std::string id, std::vector<TreeNode> children) {
  return control(NodeKind::kFallback, std::move(id), std::move(children), true);
}
TreeNode parallel(std::string id, std::vector<TreeNode> children, std::optional<std::size_t> success_threshold) {
  TreeNode n = control(NodeKind::kParallel, std::move(id), std::move(children), false);
  n.success_threshold = success_threshold;
  return n;
}
TreeNode inverter(std::string id, TreeNode child) {
  return decorator(DecoratorKind::kInverter, std::move(id), std::move(child));
}
TreeNode retry(std::string id, int max_attempts, TreeNode child) {
  TreeNode n = decorator(DecoratorKind::kRetryUntilSuccessful, std::move(id), std::move(child));
  n.max_attempts = max_attempts;
  return n;
}
TreeNode loop_body(std::string id, TreeNode child) {
  return decorator(DecoratorKind::kLoopBody, std::move(id), std::move(child));
}
TreeNode action(std::string id, std::string behavior, std::vector<PortBinding> ports) {
  return leaf(NodeKind::kAction, std::move(id), std::move(behavior), std::move(ports));
}
TreeNode condition(std::string id, std::string behavior, std::vector<PortBinding> ports) {
  return leaf(NodeKind::kCondition, std::move(id), std::move(behavior), std::move(ports));
}

}  // namespace build

std::shared_ptr<const Tree> Tree::compile(const TreeNode& root) {
  std::shared_ptr<Tree> tree(new Tree());
  tree->source_ = root;
  tree->flatten(root, std::nullopt);
  return tree;
}

std::size_t Tree::flatten(const TreeNode& n, std::optional<std::size_t> parent) {
  auto fail = [&n](const std::string& why) {
    throw MalformedTree("node '" + n.id + "' (line " + std::to_string(n.location.line) + "): " + why);
  };
  if (n.id.empty()) fail("empty node id");
  if (index_.count(n.id) != 0) fail("duplicate node id");

  const std::size_t count = n.children.size();
  switch (n.kind) {
    case NodeKind::kAction:
    case NodeKind::kCondition:
      if (count != 0) fail("leaf nodes cannot have children");
      if (n.behavior.empty()) fail("leaf without behavior name");
      break;
    case NodeKind::kDecorator:
      if (count != 1) fail("decorator needs exactly one child");
      if (n.decorator == DecoratorKind::kRetryUntilSuccessful && n.max_attempts < 1) fail("max_attempts must be >= 1");
      break;
    case NodeKind::kParallel:
      if (count == 0) fail("control node without children");
      if (n.success_threshold && (*n.success_threshold < 1 || *n.success_threshold > count)) {
        fail("success_threshold " + std::to_string(*n.success_threshold) + " outside [1, " + std::to_string(count) + "]");
      }
      break;
    case NodeKind::kSequence:
    case NodeKind::kFallback:
      if (count == 0) fail("control node without children");
      break;
  }

  const std::size_t index = nodes_.size();
  Node flat;
  flat.kind = n.kind;
  flat.id = n.id;
  flat.label = !n.label.empty() ? n.label : is_leaf(n.kind) ? n.behavior : n.id;
  flat.explicit_label = !n.label.empty();
  flat.memory = n.memory;
  flat.success_threshold = n.kind == NodeKind::kParallel ? n.success_threshold.value_or(count) : 0;
  flat.decorator = n.decorator;
  flat.max_attempts = n.max_attempts;
  flat.behavior = n.behavior;
  flat.ports = n.ports;
  flat.parent = parent;
  nodes_.push_back(std::move(flat));
  index_.emplace(n.id, index);

  for (const TreeNode& child : n.children) {
    const std::size_t c = flatten(child, index);
    nodes_[index].children.push_back(c);
  }
  return index;
}

std::optional<std::size_t> Tree::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace chargebt::bt
