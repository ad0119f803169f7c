#pragma once

#include <stdexcept>
#include <string>

namespace chargebt::bt {

// Base for contract violations raised by the engine. A runtime that threw
// mid-tick must be reset before it is ticked again.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnregisteredBehavior : public EngineError {
 public:
  UnregisteredBehavior(std::string node_id, std::string behavior)
      : EngineError("node '" + node_id + "' references unregistered behavior '" +
                    behavior + "'"),
        node_id_(std::move(node_id)),
        behavior_(std::move(behavior)) {}

  const std::string& node_id() const noexcept { return node_id_; }
  const std::string& behavior() const noexcept { return behavior_; }

 private:
  std::string node_id_;
  std::string behavior_;
};

class ConditionReturnedRunning : public EngineError {
 public:
  explicit ConditionReturnedRunning(std::string node_id)
      : EngineError("condition '" + node_id + "' returned Running"),
        node_id_(std::move(node_id)) {}

  const std::string& node_id() const noexcept { return node_id_; }

 private:
  std::string node_id_;
};

class MalformedTree : public EngineError {
 public:
  using EngineError::EngineError;
};

class UnknownNodeId : public EngineError {
 public:
  explicit UnknownNodeId(const std::string& node_id)
      : EngineError("unknown node id '" + node_id + "'") {}
};

class DuplicateName : public EngineError {
 public:
  explicit DuplicateName(const std::string& name)
      : EngineError("behavior '" + name + "' is already registered") {}
};

class MissingKey : public EngineError {
 public:
  explicit MissingKey(const std::string& key)
      : EngineError("blackboard key '" + key + "' is not set"), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class TypeMismatch : public EngineError {
 public:
  using EngineError::EngineError;
};

class UndeclaredKey : public EngineError {
 public:
  explicit UndeclaredKey(const std::string& key)
      : EngineError("blackboard key '" + key + "' is not declared") {}
};

}  // namespace chargebt::bt
