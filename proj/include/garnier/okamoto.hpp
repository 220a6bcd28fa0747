#pragma once

#include <array>
#include <optional>
#include <vector>

#include "garnier/fd.hpp"
#include "garnier/schlesinger.hpp"

namespace garnier::okamoto {

using schlesinger::SchlesingerState;
using schlesinger::ThetaGO;

/// Garnier-Okamoto coordinates: zeros lambda_k of the (1,2) entry of the
/// Q-normalized connection and the conjugate momenta mu_k.
struct GOState {
  Cx t1{}, t2{};
  std::array<Cx, 2> lambda{}, mu{};
  ThetaGO params{};
};

struct LambdaResult {
  std::array<Cx, 2> lambda;
  /// Leading coefficient X = sum t_i q12^i of the numerator.
  Cx X;
};

/// Value of q12(x) = sum q12^i / (x - t_i) for a Q state.
Cx q12_at(const SchlesingerState& q, Cx x);

/// Roots of the quadratic numerator of q12. Without `previous` the root with the
/// lexicographically smaller (Re, Im) comes first; with it, labels follow the
/// nearest-neighbour assignment. Throws ConditionIIIViolated / ConditionIVViolated.
LambdaResult extract_lambda(const SchlesingerState& q, const std::array<Cx, 2>* previous = nullptr);

/// mu = sum q11^i / (lambda - t_i); throws PoleEvaluation when lambda hits a t_i.
Cx extract_mu(const SchlesingerState& q, Cx lambda);

/// Full extraction. Accepts a B or Q state; B states are shifted first.
GOState extract_go(const SchlesingerState& s, const std::array<Cx, 2>* previous = nullptr);

/// Extraction along stored trajectory states with continuous labels.
std::vector<GOState> extract_along(const std::vector<SchlesingerState>& states);

/// Hamiltonian K_i for i in {1, 2}.
Cx hamiltonian_K(int i, const GOState& g);

/// d lambda_k / dt_j = dK_j/dmu_k and d mu_k / dt_j = -dK_j/dlambda_k, indexed [j][k].
struct GOField {
  std::array<std::array<Cx, 2>, 2> dlambda{}, dmu{};
};
GOField go_vector_field(const GOState& g, const FDScheme& fd = {});

struct GOTrajectory {
  std::vector<double> sigma;
  std::vector<GOState> states;
  std::size_t rejected_steps = 0;
  const GOState& final_state() const { return states.back(); }
};

/// Integrates the GO Hamiltonian flow along a (t1, t2) path.
GOTrajectory integrate_go(const GOState& g0, const PathPlan& path, const OdeOptions& options = {},
                          const FDScheme& fd = {});

struct GarxCoefficients {
  Cx coef_zprime, coef_z;
};
/// Coefficients of z'' = coef_zprime * z' + coef_z * z.
GarxCoefficients garx_coefficients(const GOState& g, Cx K1, Cx K2, Cx x);

/// Largest relative mismatch between finite differences of the extracted
/// (lambda, mu) along the Schlesinger flow and the GO Hamiltonian field at s.
double cross_picture_mismatch(const SchlesingerState& s, double h = 1e-3, const FDScheme& fd = {});

/// Condition (v): no local exponent is an integer. Returns false when violated.
bool exponents_non_integer(const ThetaGO& th, double tol = 1e-9);

}  // namespace garnier::okamoto
