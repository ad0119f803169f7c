#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chargebt/bt/errors.hpp"
#include "chargebt/common/hole_record.hpp"

namespace chargebt::bt {

// Alternative order matches ValueType.
using Value = std::variant<std::int64_t, double, std::string, bool, HoleRecord, HoleQueue>;

enum class ValueType : std::uint8_t { kInteger, kReal, kString, kFlag, kHole, kHoleQueue };

std::string_view to_string(ValueType t) noexcept;
std::optional<ValueType> value_type_from_string(std::string_view s) noexcept;
ValueType type_of(const Value& v) noexcept;

// Shared typed key/value store. Keys may be declared with a type up front;
// a strict blackboard rejects writes to undeclared keys.
class Blackboard {
 public:
  Blackboard() = default;

  void declare(const std::string& key, ValueType type);
  std::optional<ValueType> declared_type(std::string_view key) const;
  const std::map<std::string, ValueType, std::less<>>& declarations() const { return schema_; }

  void set_strict(bool strict) { strict_ = strict; }
  bool strict() const { return strict_; }

  void set(std::string_view key, Value value);
  const Value& get(std::string_view key) const;

  template <class T>
  const T& get_as(std::string_view key) const {
    const Value& v = get(key);
    if (const T* p = std::get_if<T>(&v)) return *p;
    throw TypeMismatch("blackboard key '" + std::string(key) + "' holds " +
                       std::string(to_string(type_of(v))));
  }

  bool contains(std::string_view key) const;
  void erase(std::string_view key);
  void clear_values();

  const std::map<std::string, Value, std::less<>>& values() const { return values_; }

  // Keys read or written since the last call to begin_access_log().
  void begin_access_log() { touched_.clear(); }
  std::vector<std::string> touched_keys() const { return {touched_.begin(), touched_.end()}; }

 private:
  void check_type(std::string_view key, const Value& value) const;

  std::map<std::string, ValueType, std::less<>> schema_;
  std::map<std::string, Value, std::less<>> values_;
  mutable std::set<std::string, std::less<>> touched_;
  bool strict_ = false;
};

}  // namespace chargebt::bt
