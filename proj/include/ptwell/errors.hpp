#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ptwell {

enum class ErrorCode {
  GridNotInvariant,
  WellCountMismatch,
  WellTouchesBoundary,
  BallsOverlap,
  FillInsufficient,
  EmptySource,
  WindowInvalid,
  ConvergenceFailure,
  WindowBoundaryHit,
  SolveFailure,
  NonIdempotent,
  NotSimple,
  GramIllConditioned,
  DualIllConditioned,
  SymmetryViolation,
  NonPositiveWeight,
  BracketInvalid,
  ConfigInvalid,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Pipeline failure carrying a machine-readable code and the module that
/// raised it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

  /// Single line of the form `error module=<m> code=<c> message=<text>`.
  std::string line() const;

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace ptwell
