#include "ptwell/errors.hpp"

#include <fmt/format.h>

namespace ptwell {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::GridNotInvariant: return "GridNotInvariant";
    case ErrorCode::WellCountMismatch: return "WellCountMismatch";
    case ErrorCode::WellTouchesBoundary: return "WellTouchesBoundary";
    case ErrorCode::BallsOverlap: return "BallsOverlap";
    case ErrorCode::FillInsufficient: return "FillInsufficient";
    case ErrorCode::EmptySource: return "EmptySource";
    case ErrorCode::WindowInvalid: return "WindowInvalid";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::WindowBoundaryHit: return "WindowBoundaryHit";
    case ErrorCode::SolveFailure: return "SolveFailure";
    case ErrorCode::NonIdempotent: return "NonIdempotent";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::GramIllConditioned: return "GramIllConditioned";
    case ErrorCode::DualIllConditioned: return "DualIllConditioned";
    case ErrorCode::SymmetryViolation: return "SymmetryViolation";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::BracketInvalid: return "BracketInvalid";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& message)
    : std::runtime_error(message), code_(code), module_(std::move(module)) {}

std::string Error::line() const {
  std::string msg = what();
  for (char& c : msg) {
    if (c == '\n') c = ' ';
  }
  return fmt::format("error module={} code={} message={}", module_, to_string(code_), msg);
}

}  // namespace ptwell
