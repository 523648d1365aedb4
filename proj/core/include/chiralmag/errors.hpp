#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chiralmag {

enum class ErrorCode {
  NonPositiveDeterminant,
  ZeroVectorNode,
  DegenerateMagnetization,
  DegenerateGrid,
  InvalidGrid,
  InvalidMaterial,
  BoundaryViolation,
  OnBoundaryImage,
  NonIntegerWinding,
  MissingPreimage,
  GridMismatch,
  DomainEscaped,
  LineSearchStalled,
  StepFailed,
  CertificationFailed,
  UnknownFixture,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. Every failure mode named in the public API maps to
/// one ErrorCode so callers (the CLI in particular) can translate it into an
/// exit status without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised by the optimizer when backtracking underflows. `block` is "y" or "mu".
class LineSearchStalled : public Error {
public:
  LineSearchStalled(std::string block, const std::string& message)
      : Error(ErrorCode::LineSearchStalled, block + " block: " + message), block_(std::move(block)) {}
  const std::string& block() const noexcept { return block_; }

private:
  std::string block_;
};

class StepFailed : public Error {
public:
  StepFailed(int step, const std::string& message)
      : Error(ErrorCode::StepFailed, "step " + std::to_string(step) + ": " + message), step_(step) {}
  int step() const noexcept { return step_; }

private:
  int step_;
};

} // namespace chiralmag
