#pragma once

#include <stdexcept>
#include <string>

namespace chargebt::mission {

class MissionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyHoleSet : public MissionError {
 public:
  EmptyHoleSet() : MissionError("no detected holes to plan") {}
};

class TooManyHoles : public MissionError {
 public:
  explicit TooManyHoles(std::size_t n)
      : MissionError(std::to_string(n) + " holes exceed the mission capacity of 100") {}
};

class EmptyQueue : public MissionError {
 public:
  EmptyQueue() : MissionError("mission queue is empty") {}
};

class UnknownHole : public MissionError {
 public:
  explicit UnknownHole(const std::string& id) : MissionError("unknown hole '" + id + "'") {}
};

class InvalidHoleTransition : public MissionError {
 public:
  using MissionError::MissionError;
};

class NoMission : public MissionError {
 public:
  NoMission() : MissionError("no charging mission has been planned") {}
};

}  // namespace chargebt::mission
