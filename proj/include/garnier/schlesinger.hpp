#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "garnier/mat2.hpp"
#include "garnier/ode.hpp"

namespace garnier::schlesinger {

using Times = std::array<Cx, 4>;
using Residues = std::array<Mat2, 4>;

/// Local exponents theta_1..theta_4 at t1, t2, 1, 0 and the exponent at infinity.
/// In the diagonal case B_inf = diag(k/2, -k/2); in the Jordan case
/// B_inf = [[0,0],[1,0]] and Delta_inf = 0.
struct ThetaGO {
  std::array<Cx, 4> theta{};
  Cx k_inf{};
  bool jordan = false;

  static ThetaGO from_exponents(const std::array<Cx, 4>& theta, Cx k_inf) { return {theta, k_inf, false}; }

  Cx sum() const { return theta[0] + theta[1] + theta[2] + theta[3]; }
  Cx theta_inf() const { return k_inf + 1.0; }
  Cx delta(int i) const { return theta[i] * theta[i] / 4.0; }
  Cx delta_inf() const { return jordan ? Cx(0.0) : k_inf * k_inf / 4.0; }
  /// kappa = ((sum theta - 1)^2 - theta_inf^2) / 4.
  Cx kappa() const {
    const Cx s = sum() - 1.0;
    return 0.25 * (s * s - theta_inf() * theta_inf());
  }
  Cx chi() const { return -0.5 * (sum() + theta_inf() - 1.0); }
  /// Eigenvalue of the homogeneity equation for the gauged wavefunction.
  Cx bpz_lambda() const {
    const Cx c = 1.0 + 0.5 * sum();
    return delta_inf() - c * c;
  }
};

enum class Norm { B, Q };
enum class ShiftDir { BtoQ, QtoB };

/// Residues at (t1, t2, 1, 0). B: traceless with det -theta^2/4; Q = B + theta/2.
struct SchlesingerState {
  Cx t1{}, t2{};
  Residues A{};
  Norm norm = Norm::B;
  ThetaGO theta{};

  Times times() const { return {t1, t2, 1.0, 0.0}; }
  Mat2 a_inf() const { return A[0] + A[1] + A[2] + A[3]; }
};

/// Throws TimeCollision unless the four times are pairwise distinct (up to tol).
void check_times(const Times& t, double tol = 1e-12);

/// dA_j/dt_i for all j with every time free.
Residues flow_rhs(const Times& t, const Residues& A, int i);

struct Rhs {
  Residues d_t1, d_t2;
};
Rhs schlesinger_rhs(const SchlesingerState& s);

/// Residues moved to the B-normalization (a no-op for B states).
Residues b_residues(const SchlesingerState& s);

SchlesingerState shift_normalization(const SchlesingerState& s, ShiftDir dir);

/// A(x) = sum A_i / (x - t_i); throws PoleEvaluation within tol of a pole.
Mat2 connection_matrix(const SchlesingerState& s, Cx x, double tol = 1e-12);

/// d ln tau / dt_i = sum_{j != i} tr(A_j A_i) / (t_i - t_j) for B residues.
std::array<Cx, 4> tau_logderiv_all(const Times& t, const Residues& B);
std::array<Cx, 2> tau_logderiv(const SchlesingerState& s);

struct Trajectory {
  std::vector<double> sigma;
  std::vector<SchlesingerState> states;
  std::vector<Cx> ln_tau;
  std::vector<double> sample_sigma;
  std::vector<SchlesingerState> samples;
  std::vector<Cx> sample_ln_tau;
  std::size_t rejected_steps = 0;

  const SchlesingerState& final_state() const { return states.back(); }
};

/// Declared singular loci of a (t1, t2) path: t_i in {0, 1} and t1 = t2.
std::vector<Singularity> time_singularities();

/// A (t1, t2) polyline with the standard singular loci attached.
PathPlan time_path(const std::vector<std::array<Cx, 2>>& waypoints, double exclusion_radius = 0.05);

/// Integrates the residues and ln tau (zero at the base point) along a (t1, t2) path.
Trajectory integrate_schlesinger(const SchlesingerState& s0, const PathPlan& path,
                                 const OdeOptions& options = {});

struct Drift {
  std::array<double, 4> trace{}, det{};
  double a_inf = 0.0;
  double max() const;
};
Drift measure_drift(const SchlesingerState& a, const SchlesingerState& b);

struct Generated {
  SchlesingerState state;
  /// Global conjugation C with B_i = C^{-1} B_i^raw C making B_inf diagonal.
  Mat2 conjugation;
};

/// Seeded B-normalized state with prescribed theta and diagonal B_inf = diag(k/2, -k/2),
/// Re k >= 0. Entries of the raw residues are complex normal with the given scale.
Generated random_b_state(const std::array<Cx, 4>& theta, Cx t1, Cx t2, std::uint64_t seed,
                         double scale = 0.4);

/// Fixed-step flow of the state along t_{i+1} (i = 0, 1) by a complex increment.
/// Smooth in delta, which finite-difference stencils depend on.
SchlesingerState hop(const SchlesingerState& s, int i, Cx delta, int steps = 4);

/// Relative mismatch of d/dt2 (d ln tau/dt1) and d/dt1 (d ln tau/dt2) at s,
/// by finite differences of step h over hops of the flow.
double tau_closedness(const SchlesingerState& s, double h = 1e-3);

}  // namespace garnier::schlesinger
