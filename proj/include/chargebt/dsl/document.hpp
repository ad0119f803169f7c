#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chargebt/bt/blackboard.hpp"
#include "chargebt/bt/registry.hpp"
#include "chargebt/bt/tree.hpp"
#include "chargebt/dsl/errors.hpp"

namespace chargebt::dsl {

inline constexpr int kFormatVersion = 1;

struct PortSpec {
  std::string name;
  bt::ValueType type = bt::ValueType::kString;

  bool operator==(const PortSpec&) const = default;
};

struct BehaviorSpec {
  std::string name;
  bt::BehaviorKind kind = bt::BehaviorKind::kAction;
  std::vector<PortSpec> ports;
  bt::SourceLocation location;

  bool operator==(const BehaviorSpec& o) const { return name == o.name && kind == o.kind && ports == o.ports; }
};

struct KeyDeclaration {
  std::string key;
  bt::ValueType type = bt::ValueType::kString;
  bt::SourceLocation location;

  bool operator==(const KeyDeclaration& o) const { return key == o.key && type == o.type; }
};

struct TreeDefinition {
  std::string name;
  bt::TreeNode root;
  bt::SourceLocation location;

  bool operator==(const TreeDefinition& o) const { return name == o.name && root == o.root; }
};

// One mission's trees plus the blackboard schema and behavior manifest they
// are checked against.
struct TreeDocument {
  int format_version = kFormatVersion;
  std::vector<KeyDeclaration> blackboard;
  std::vector<BehaviorSpec> manifest;
  std::vector<TreeDefinition> trees;

  const TreeDefinition* find_tree(std::string_view name) const;
  const BehaviorSpec* find_behavior(std::string_view name) const;
  const KeyDeclaration* find_key(std::string_view key) const;

  // Declares every key on `bb` with its type.
  void declare_keys(bt::Blackboard& bb) const;

  bool operator==(const TreeDocument&) const = default;
};

// Throws SyntaxError, DuplicateTreeName, DuplicateNodeId or UnsupportedFormat.
TreeDocument parse(std::string_view text);
TreeDocument parse_file(const std::string& path);

std::string serialize(const TreeDocument& doc);

// Combines documents; duplicate trees or conflicting declarations throw
// ParseError pointing at the second occurrence.
TreeDocument merge(std::vector<TreeDocument> docs);

// Loads and merges every *.tree.xml file in a directory (sorted by name).
TreeDocument load_directory(const std::string& dir);

}  // namespace chargebt::dsl
