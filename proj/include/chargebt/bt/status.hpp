#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

namespace chargebt::bt {

enum class Status : std::uint8_t { kSuccess, kFailure, kRunning };

constexpr std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::kSuccess:
      return "Success";
    case Status::kFailure:
      return "Failure";
    case Status::kRunning:
      return "Running";
  }
  return "Failure";
}

constexpr std::optional<Status> status_from_string(std::string_view s) noexcept {
  if (s == "Success") return Status::kSuccess;
  if (s == "Failure") return Status::kFailure;
  if (s == "Running") return Status::kRunning;
  return std::nullopt;
}

}  // namespace chargebt::bt
