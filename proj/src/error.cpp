#include "garnier/error.hpp"

namespace garnier {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateQuadratic: return "DegenerateQuadratic";
    case ErrorKind::SingularityApproach: return "SingularityApproach";
    case ErrorKind::StencilFailure: return "StencilFailure";
    case ErrorKind::TimeCollision: return "TimeCollision";
    case ErrorKind::PoleEvaluation: return "PoleEvaluation";
    case ErrorKind::ConditionIIIViolated: return "ConditionIIIViolated";
    case ErrorKind::ConditionIVViolated: return "ConditionIVViolated";
    case ErrorKind::ResonantInfinity: return "ResonantInfinity";
    case ErrorKind::ZeroGauge: return "ZeroGauge";
    case ErrorKind::ReductionLocus: return "ReductionLocus";
    case ErrorKind::NotOnReduction: return "NotOnReduction";
    case ErrorKind::NearSingularPhi: return "NearSingularPhi";
    case ErrorKind::DiagonalCollision: return "DiagonalCollision";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::DegenerateJacobian: return "DegenerateJacobian";
    case ErrorKind::InfeasibleTheta: return "InfeasibleTheta";
    case ErrorKind::InvalidPath: return "InvalidPath";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace garnier
