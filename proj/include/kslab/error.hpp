#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kslab {

enum class ErrorCode {
  InvalidParams,
  NegativeInput,
  NegativeProfile,
  InconsistentCache,
  StepTooSmall,
  NonMonotone,
  InvalidRegime,
  EmptyInterval,
  DivergentIntegrand,
  InsufficientGrowth,
  InvalidP,
  DivergentTail,
  InsufficientInitialMass,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::NegativeProfile: return "NegativeProfile";
    case ErrorCode::InconsistentCache: return "InconsistentCache";
    case ErrorCode::StepTooSmall: return "StepTooSmall";
    case ErrorCode::NonMonotone: return "NonMonotone";
    case ErrorCode::InvalidRegime: return "InvalidRegime";
    case ErrorCode::EmptyInterval: return "EmptyInterval";
    case ErrorCode::DivergentIntegrand: return "DivergentIntegrand";
    case ErrorCode::InsufficientGrowth: return "InsufficientGrowth";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::DivergentTail: return "DivergentTail";
    case ErrorCode::InsufficientInitialMass: return "InsufficientInitialMass";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kslab
