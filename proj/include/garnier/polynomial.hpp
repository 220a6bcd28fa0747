#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "garnier/fd.hpp"
#include "garnier/okamoto.hpp"
#include "garnier/schlesinger.hpp"

namespace garnier::polynomial {

/// Exponents at 0, 1, t1, t2 and the two exponents at infinity.
struct ThetaPG {
  Cx th0{}, th1{}, tht1{}, tht2{}, thinf1{}, thinf2{};

  /// Completes thinf2 from the Fuchs relation.
  static ThetaPG with_fuchs(Cx th0, Cx th1, Cx tht1, Cx tht2, Cx thinf1) {
    return {th0, th1, tht1, tht2, thinf1, -(th0 + th1 + tht1 + tht2 + thinf1)};
  }
  Cx fuchs_defect() const { return th0 + th1 + tht1 + tht2 + thinf1 + thinf2; }
  Cx tht(int i) const { return i == 0 ? tht1 : tht2; }
};

struct PGState {
  Cx t1{}, t2{};
  std::array<Cx, 2> q{}, p{};
  ThetaPG params{};
};

/// Throws TimeCollision unless t1, t2, 1, 0 are pairwise distinct.
void check_pg_times(Cx t1, Cx t2);

/// H_{Gar, t_i} for i in {1, 2}; the second is the first with indices swapped.
Cx hamiltonian_HGar(int i, const PGState& s);

/// The eight closed-form right-hand sides multiplied by t_k (t_k - 1):
/// derivatives along t1 of (q1, q2, p1, p2) and along t2 of the same.
struct ExplicitTerms {
  Cx oqo, opo, oppo, opt, tqo, tqt, tpo, tpt;
};
ExplicitTerms explicit_terms(const PGState& s);

/// Derivatives of (q1, q2, p1, p2) along t1 and along t2.
struct PGRhs {
  std::array<Cx, 4> d_t1, d_t2;
};
PGRhs pg_rhs_explicit(const PGState& s);

/// Hamilton-equation derivatives of (q1, q2, p1, p2) from finite differences of H.
PGRhs pg_rhs_from_hamiltonian(const PGState& s, const FDScheme& fd = {});

/// d ln u / dt_i.
std::array<Cx, 2> u_logderiv(const PGState& s);

struct PGTrajectory {
  std::vector<double> sigma;
  std::vector<PGState> states;
  std::vector<Cx> u;
  std::vector<double> sample_sigma;
  std::vector<PGState> samples;
  std::vector<Cx> sample_u;
  std::size_t rejected_steps = 0;
  const PGState& final_state() const { return states.back(); }
};

/// Integrates (q, p) together with the gauge u (u = u0 at the base point).
PGTrajectory integrate_pg(const PGState& s0, const PathPlan& path, const OdeOptions& options = {}, Cx u0 = 1.0);

struct PGHop {
  PGState state;
  Cx u;
};
/// Moves (q, p, u) by delta in t_i (i = 1 or 2) with fixed-step integration,
/// smooth in delta as finite-difference stencils require.
PGHop pg_hop(const PGState& s, Cx u, int i, Cx delta, int steps = 4);

/// (Ahat_0, Ahat_1, Ahat_t1, Ahat_t2).
std::array<Mat2, 4> ahat_matrices(const PGState& s);

/// Entry (2,1) of -sum Ahat.
Cx elem_a(const PGState& s);

/// (S_0, S_1, S_t1, S_t2) = diag(1,u)^{-1} P^{-1} Ahat P diag(1,u).
std::array<Mat2, 4> s_matrices(const PGState& s, Cx u);

/// Q-normalized Schlesinger state with Q1 = S_t1, Q2 = S_t2, Q3 = S_1, Q4 = S_0.
schlesinger::SchlesingerState to_schlesinger(const PGState& s, Cx u);

/// Largest relative mismatch between finite differences of S along the two
/// flows and the Schlesinger right-hand side applied to S.
double linearization_residual(const PGState& s, Cx u, double h = 1e-3);

/// Largest distance of spec(S_xi) from {0, theta^xi}.
double spectrum_error(const PGState& s, Cx u);

/// Exponents of the linear system in GO labels.
schlesinger::ThetaGO go_theta(const ThetaPG& th);

std::array<Cx, 2> bridge_q_from_lambda(Cx lambda1, Cx lambda2, Cx t1, Cx t2);
std::array<Cx, 2> bridge_lambda_from_q(Cx q1, Cx q2, Cx t1, Cx t2);

/// LHS - RHS of the two relations tying p_i to (lambda_k, mu_k).
std::array<Cx, 2> mu_p_relations(const PGState& s, const okamoto::GOState& g);

struct PVIState {
  Cx omega{}, Q{}, P{};
  ThetaPG params{};
};

/// Throws NotOnReduction unless q1 + q2 = 1 and thinf1 = thinf2 + 1.
PVIState pvi_reduce(const PGState& s, double tol = 1e-10);

Cx pvi_omega(Cx t1, Cx t2);
Cx pvi_hamiltonian(const PVIState& v);
/// (dH/dQ, dH/dP).
std::array<Cx, 2> pvi_partials(const PVIState& v);

/// t1 for a given omega with t2 held fixed.
Cx pvi_t1_from_omega(Cx omega, Cx t2);

/// Polynomial Garnier flow parameterized by omega along a straight segment,
/// t2 fixed and t1 recomputed from omega.
PGTrajectory integrate_pvi_segment(const PGState& s0, Cx omega_end, const OdeOptions& options = {});

/// Largest relative residual of Q' = H_P and P' = -H_Q at s, by finite
/// differences along the omega-parameterized flow.
double pvi_hamilton_residual(const PGState& s, double h = 1e-3, const FDScheme& fd = {});

/// Newton search from seeded starting points for a state where all eight
/// right-hand sides vanish, checked at nearby times so the state is stationary. Throws DegenerateJacobian if none is found.
PGState find_fixed_point(const ThetaPG& th, Cx t1, Cx t2, std::uint64_t seed);

}  // namespace garnier::polynomial
