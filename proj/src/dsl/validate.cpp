#include "chargebt/dsl/validate.hpp"

#include <algorithm>
#include <ostream>

namespace chargebt::dsl {

namespace {

class Validator {
 public:
  explicit Validator(const TreeDocument& doc) : doc_(doc) {}

  std::vector<Diagnostic> run() {
    for (const TreeDefinition& t : doc_.trees) {
      tree_ = &t;
      visit(t.root, 0);
    }
    return std::move(out_);
  }

 private:
  void report(Severity sev, std::string code, const bt::TreeNode& n, std::string message) {
    out_.push_back({sev, std::move(code), std::move(message), tree_->name, n.id, n.location});
  }
  void error(std::string code, const bt::TreeNode& n, std::string message) {
    report(Severity::kError, std::move(code), n, std::move(message));
  }
  void warning(std::string code, const bt::TreeNode& n, std::string message) {
    report(Severity::kWarning, std::move(code), n, std::move(message));
  }

  void visit(const bt::TreeNode& n, int parallel_depth) {
    const std::size_t count = n.children.size();
    switch (n.kind) {
      case bt::NodeKind::kAction:
      case bt::NodeKind::kCondition:
        check_leaf(n);
        break;
      case bt::NodeKind::kDecorator:
        if (count != 1) {
          error("decorator-arity", n, "decorator has " + std::to_string(count) + " children, needs exactly 1");
        }
        if (n.decorator == bt::DecoratorKind::kRetryUntilSuccessful && n.max_attempts < 1) {
          error("retry-attempts", n, "RetryUntilSuccessful needs max_attempts >= 1");
        }
        break;
      case bt::NodeKind::kParallel:
        if (count == 0) error("empty-control", n, "Parallel has no children");
        if (n.success_threshold && *n.success_threshold == 0) {
          error("invalid-threshold", n, "success_threshold must be at least 1");
        }
        if (n.success_threshold && *n.success_threshold > count) {
          error("threshold-exceeds-children", n,
                "success_threshold " + std::to_string(*n.success_threshold) + " exceeds " + std::to_string(count) +
                    " children");
        }
        break;
      case bt::NodeKind::kSequence:
      case bt::NodeKind::kFallback:
        if (count == 0) error("empty-control", n, std::string(bt::to_string(n.kind)) + " has no children");
        if (n.memory && parallel_depth > 0) {
          warning("memory-under-parallel", n,
                  "memory " + std::string(bt::to_string(n.kind)) +
                      " below a Parallel remembers child results across ticks and loses reactivity; prefer a "
                      "reactive node guarded by a goal condition");
        }
        if (n.kind == bt::NodeKind::kFallback) check_fallback_style(n);
        break;
    }
    const int depth = parallel_depth + (n.kind == bt::NodeKind::kParallel ? 1 : 0);
    for (const auto& c : n.children) visit(c, depth);
  }

  // Backward chaining puts the goal condition before the actions achieving
  // it; a condition after an action is only checked once the action failed.
  void check_fallback_style(const bt::TreeNode& n) {
    const bt::TreeNode* first_action = nullptr;
    for (const auto& c : n.children) {
      if (c.kind == bt::NodeKind::kAction && first_action == nullptr) first_action = &c;
      if (c.kind == bt::NodeKind::kCondition && first_action != nullptr) {
        warning("condition-after-action", c,
                "Condition '" + c.behavior + "' under Fallback '" + n.id + "' comes after Action '" +
                    first_action->behavior + "'");
      }
    }
  }

  void check_leaf(const bt::TreeNode& n) {
    const bool is_action = n.kind == bt::NodeKind::kAction;
    if (!n.children.empty()) {
      error("leaf-with-children", n, std::string(is_action ? "Action" : "Condition") + " '" + n.id + "' has children");
    }
    const BehaviorSpec* spec = doc_.find_behavior(n.behavior);
    if (spec == nullptr) {
      error("unknown-behavior", n, "behavior '" + n.behavior + "' is not in the manifest");
      return;
    }
    const auto expected = is_action ? bt::BehaviorKind::kAction : bt::BehaviorKind::kCondition;
    if (spec->kind != expected) {
      error("kind-mismatch", n,
            "behavior '" + n.behavior + "' is declared as " +
                (spec->kind == bt::BehaviorKind::kAction ? "an Action" : "a Condition"));
    }
    for (const auto& binding : n.ports) {
      const auto port = std::find_if(spec->ports.begin(), spec->ports.end(),
                                     [&](const PortSpec& p) { return p.name == binding.port; });
      if (port == spec->ports.end()) {
        error("unknown-port", n, "behavior '" + n.behavior + "' has no port '" + binding.port + "'");
        continue;
      }
      const KeyDeclaration* key = doc_.find_key(binding.key);
      if (key == nullptr) {
        error("undeclared-key", n, "port '" + binding.port + "' is bound to undeclared key '" + binding.key + "'");
      } else if (key->type != port->type) {
        error("port-type-mismatch", n,
              "port '" + binding.port + "' expects " + std::string(bt::to_string(port->type)) + " but key '" +
                  binding.key + "' is " + std::string(bt::to_string(key->type)));
      }
    }
    for (const auto& port : spec->ports) {
      const bool bound = std::any_of(n.ports.begin(), n.ports.end(),
                                     [&](const bt::PortBinding& b) { return b.port == port.name; });
      if (!bound) error("missing-port", n, "port '" + port.name + "' of '" + n.behavior + "' is not bound");
    }
  }

  const TreeDocument& doc_;
  const TreeDefinition* tree_ = nullptr;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate(const TreeDocument& doc) { return Validator(doc).run(); }

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::kError; });
}

int exit_code(const std::vector<Diagnostic>& diagnostics) {
  if (has_errors(diagnostics)) return 2;
  return diagnostics.empty() ? 0 : 1;
}

std::ostream& operator<<(std::ostream& os, const Diagnostic& d) {
  os << d.location.line << ':' << d.location.column << ": "
     << (d.severity == Severity::kError ? "error" : "warning") << " [" << d.code << "] " << d.tree << '/'
     << d.node_id << ": " << d.message;
  return os;
}

}  // namespace chargebt::dsl
