#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chargebt/dsl/document.hpp"

namespace chargebt::dsl {

enum class Severity { kWarning, kError };

struct Diagnostic {
  Severity severity = Severity::kError;
  std::string code;
  std::string message;
  std::string tree;
  std::string node_id;
  bt::SourceLocation location;
};

// Structural and schema checks a parsed document must pass before it can be
// executed, plus style lints reported as warnings.
//
// Errors: unknown-behavior, kind-mismatch, leaf-with-children,
// decorator-arity, empty-control, threshold-exceeds-children,
// invalid-threshold, retry-attempts, undeclared-key, port-type-mismatch,
// missing-port, unknown-port.
// Warnings: memory-under-parallel, condition-after-action.
std::vector<Diagnostic> validate(const TreeDocument& doc);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

// 0 clean, 1 warnings only, 2 any error.
int exit_code(const std::vector<Diagnostic>& diagnostics);

std::ostream& operator<<(std::ostream& os, const Diagnostic& d);

}  // namespace chargebt::dsl
