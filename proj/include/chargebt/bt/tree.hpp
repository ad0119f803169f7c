#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chargebt::bt {

enum class NodeKind : std::uint8_t { kSequence, kFallback, kParallel, kDecorator, kAction, kCondition };

enum class DecoratorKind : std::uint8_t { kInverter, kRetryUntilSuccessful, kLoopBody };

std::string_view to_string(NodeKind k) noexcept;
std::string_view to_string(DecoratorKind k) noexcept;
std::optional<DecoratorKind> decorator_from_string(std::string_view s) noexcept;

constexpr bool is_leaf(NodeKind k) noexcept { return k == NodeKind::kAction || k == NodeKind::kCondition; }

struct SourceLocation {
  int line = 0;
  int column = 0;
};

struct PortBinding {
  std::string port;
  std::string key;

  bool operator==(const PortBinding&) const = default;
};

// Declarative tree structure. Equality is structural and ignores source
// locations.
struct TreeNode {
  NodeKind kind = NodeKind::kSequence;
  std::string id;
  std::string label;
  bool memory = false;                           // Sequence / Fallback
  std::optional<std::size_t> success_threshold;  // Parallel; empty means all children
  DecoratorKind decorator = DecoratorKind::kInverter;
  int max_attempts = 1;                          // RetryUntilSuccessful
  std::string behavior;                          // Action / Condition
  std::vector<PortBinding> ports;
  std::vector<TreeNode> children;
  SourceLocation location;

  TreeNode&& labeled(std::string text) && {
    label = std::move(text);
    return std::move(*this);
  }

  friend bool operator==(const TreeNode& a, const TreeNode& b);
};

namespace build {

TreeNode sequence(std::string id, std::vector<TreeNode> children);
TreeNode memory_sequence(std::string id, std::vector<TreeNode> children);
TreeNode fallback(std::string id, std::vector<TreeNode> children);
TreeNode memory_fallback(std::string id, std::vector<TreeNode> children);
TreeNode parallel(std::string id, std::vector<TreeNode> children,
                  std::optional<std::size_t> success_threshold = std::nullopt);
TreeNode inverter(std::string id, TreeNode child);
TreeNode retry(std::string id, int max_attempts, TreeNode child);
TreeNode loop_body(std::string id, TreeNode child);
TreeNode action(std::string id, std::string behavior, std::vector<PortBinding> ports = {});
TreeNode condition(std::string id, std::string behavior, std::vector<PortBinding> ports = {});

}  // namespace build

// Immutable, flattened (pre-order) form of a TreeNode used by the runtime.
class Tree {
 public:
  struct Node {
    NodeKind kind;
    std::string id;
    std::string label;
    bool explicit_label = false;
    bool memory = false;
    std::size_t success_threshold = 0;
    DecoratorKind decorator = DecoratorKind::kInverter;
    int max_attempts = 1;
    std::string behavior;
    std::vector<PortBinding> ports;
    std::vector<std::size_t> children;
    std::optional<std::size_t> parent;
  };

  // Throws MalformedTree when the structural invariants do not hold.
  static std::shared_ptr<const Tree> compile(const TreeNode& root);

  std::span<const Node> nodes() const { return nodes_; }
  const Node& node(std::size_t index) const { return nodes_.at(index); }
  std::size_t size() const { return nodes_.size(); }
  std::optional<std::size_t> find(std::string_view id) const;
  const TreeNode& source() const { return source_; }

 private:
  Tree() = default;
  std::size_t flatten(const TreeNode& n, std::optional<std::size_t> parent);

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  TreeNode source_;
};

}  // namespace chargebt::bt
