#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace garnier {

enum class ErrorKind {
  DegenerateQuadratic,
  SingularityApproach,
  StencilFailure,
  TimeCollision,
  PoleEvaluation,
  ConditionIIIViolated,
  ConditionIVViolated,
  ResonantInfinity,
  ZeroGauge,
  ReductionLocus,
  NotOnReduction,
  NearSingularPhi,
  DiagonalCollision,
  BranchAmbiguity,
  DegenerateJacobian,
  InfeasibleTheta,
  InvalidPath,
  ConfigInvalid,
};

std::string_view to_string(ErrorKind kind);

/// Numerical failure carrying a machine-readable kind.
class NumericError : public std::runtime_error {
 public:
  NumericError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw NumericError(kind, what);
}

}  // namespace garnier
