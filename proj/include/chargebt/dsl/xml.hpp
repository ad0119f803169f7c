#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "chargebt/dsl/errors.hpp"

namespace chargebt::dsl::xml {

struct Attribute {
  std::string name;
  std::string value;
  int line = 0;
  int column = 0;
};

struct Element {
  std::string name;
  std::vector<Attribute> attributes;
  std::vector<Element> children;
  int line = 0;
  int column = 0;

  const Attribute* attribute(std::string_view key) const;
};

// Reads the subset of XML used by tree documents: an optional prolog,
// comments, elements with quoted attributes, the five predefined entities
// and numeric character references. Character data other than whitespace is
// rejected. Throws SyntaxError with the 1-based line and column of the fault.
Element parse(std::string_view text);

std::string escape(std::string_view raw);

}  // namespace chargebt::dsl::xml
