#include "chargebt/bt/blackboard.hpp"

namespace chargebt::bt {

std::string_view to_string(ValueType t) noexcept {
  switch (t) {
    case ValueType::kInteger:
      return "int";
    case ValueType::kReal:
      return "real";
    case ValueType::kString:
      return "string";
    case ValueType::kFlag:
      return "flag";
    case ValueType::kHole:
      return "hole";
    case ValueType::kHoleQueue:
      return "hole_queue";
  }
  return "string";
}

std::optional<ValueType> value_type_from_string(std::string_view s) noexcept {
  for (auto t : {ValueType::kInteger, ValueType::kReal, ValueType::kString, ValueType::kFlag,
                 ValueType::kHole, ValueType::kHoleQueue}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

ValueType type_of(const Value& v) noexcept { return static_cast<ValueType>(v.index()); }

void Blackboard::declare(const std::string& key, ValueType type) {
  auto [it, inserted] = schema_.emplace(key, type);
  if (!inserted && it->second != type) {
    throw TypeMismatch("blackboard key '" + key + "' redeclared as " + std::string(to_string(type)) +
                       " (was " + std::string(to_string(it->second)) + ")");
  }
}

std::optional<ValueType> Blackboard::declared_type(std::string_view key) const {
  auto it = schema_.find(key);
  if (it == schema_.end()) return std::nullopt;
  return it->second;
}

void Blackboard::check_type(std::string_view key, const Value& value) const {
  auto it = schema_.find(key);
  if (it == schema_.end()) {
    if (strict_) throw UndeclaredKey(std::string(key));
    return;
  }
  if (it->second != type_of(value)) {
    throw TypeMismatch("blackboard key '" + std::string(key) + "' is declared " +
                       std::string(to_string(it->second)) + ", got " +
                       std::string(to_string(type_of(value))));
  }
}

void Blackboard::set(std::string_view key, Value value) {
  check_type(key, value);
  touched_.emplace(key);
  auto it = values_.find(key);
  if (it == values_.end()) {
    values_.emplace(std::string(key), std::move(value));
  } else {
    it->second = std::move(value);
  }
}

const Value& Blackboard::get(std::string_view key) const {
  touched_.emplace(key);
  auto it = values_.find(key);
  if (it == values_.end()) throw MissingKey(std::string(key));
  return it->second;
}

bool Blackboard::contains(std::string_view key) const { return values_.find(key) != values_.end(); }

void Blackboard::erase(std::string_view key) {
  auto it = values_.find(key);
  if (it == values_.end()) return;
  touched_.emplace(key);
  values_.erase(it);
}

void Blackboard::clear_values() { values_.clear(); }

}  // namespace chargebt::bt
