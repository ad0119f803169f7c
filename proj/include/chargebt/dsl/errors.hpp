#pragma once

#include <stdexcept>
#include <string>

namespace chargebt::dsl {

// Parse failures always carry the position of the offending construct.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        detail_(what),
        line_(line),
        column_(column) {}

  const std::string& detail() const noexcept { return detail_; }
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  std::string detail_;
  int line_;
  int column_;
};

class SyntaxError : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateTreeName : public ParseError {
 public:
  DuplicateTreeName(const std::string& name, int line, int column)
      : ParseError("duplicate tree name '" + name + "'", line, column) {}
};

class DuplicateNodeId : public ParseError {
 public:
  DuplicateNodeId(const std::string& id, int line, int column)
      : ParseError("duplicate node id '" + id + "'", line, column) {}
};

class UnsupportedFormat : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace chargebt::dsl
