#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace atv {

enum class ErrorCode {
  NegativeMass,
  BadNormalization,
  ShapeMismatch,
  SolverFailure,
  CapExceeded,
  Infeasible,
  BadEpsilon,
  BadSpec,
  Parse,
  Usage,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::BadNormalization: return "BadNormalization";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::BadEpsilon: return "BadEpsilon";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Usage: return "Usage";
  }
  return "Unknown";
}

// All library failures are reported through this one exception type; the
// code is what callers (and the CLI exit-code mapping) switch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace atv
