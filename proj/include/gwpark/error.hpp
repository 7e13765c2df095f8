#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwpark {

enum class ErrorKind {
  InvalidSpec,
  NotCritical,
  Delta1Offspring,
  Inadmissible,
  RejectionBudgetExceeded,
  BadNode,
  TooLarge,
  LabelMismatch,
  BadPermutation,
  MissingTimes,
  InvalidParams,
  SingularityApproached,
  AllOverflowed,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::NotCritical: return "NotCritical";
    case ErrorKind::Delta1Offspring: return "Delta1Offspring";
    case ErrorKind::Inadmissible: return "Inadmissible";
    case ErrorKind::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
    case ErrorKind::BadNode: return "BadNode";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::LabelMismatch: return "LabelMismatch";
    case ErrorKind::BadPermutation: return "BadPermutation";
    case ErrorKind::MissingTimes: return "MissingTimes";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::SingularityApproached: return "SingularityApproached";
    case ErrorKind::AllOverflowed: return "AllOverflowed";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gwpark
