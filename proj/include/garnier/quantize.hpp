#pragma once

#include <array>
#include <string>
#include <vector>

#include "garnier/fd.hpp"
#include "garnier/okamoto.hpp"
#include "garnier/rng.hpp"
#include "garnier/schlesinger.hpp"

namespace garnier::quantize {

using schlesinger::Residues;
using schlesinger::SchlesingerState;
using schlesinger::ThetaGO;
using schlesinger::Times;

/// Base data for the wavefunction: a Schlesinger state at the base times and
/// the point base_x where Phi is normalized to the identity.
struct Frame {
  SchlesingerState base;
  Cx base_x;
};

/// Builds a frame from a state in either normalization; the residues are
/// stored B-normalized. Throws PoleEvaluation when base_x sits on a pole.
Frame make_frame(const SchlesingerState& s, Cx base_x);

/// Everything needed to evaluate M, Y and V at one configuration, with every
/// multivalued logarithm continued from the frame base.
struct FieldPoint {
  Times t{};
  Residues B{};
  ThetaGO theta{};
  Cx x{}, y{};
  Mat2 phi_x, phi_y;
  Cx ln_tau{};
  std::array<Cx, 4> log_xt{}, log_yt{};
  /// log(t_i - t_j) for the pairs (0,1), (0,2), (0,3), (1,2), (1,3), (2,3).
  std::array<Cx, 6> log_tt{};
};

/// Optional intermediate x and y waypoints for locate.
struct Route {
  std::vector<Cx> x_via, y_via;
};

/// Transports from the frame base: times first at x = base_x, then x and y
/// along straight legs at the final times. Adaptive integration; throws
/// SingularityApproach or InvalidPath when a leg runs into a pole.
FieldPoint locate(const Frame& frame, Cx x, Cx y, Cx t1, Cx t2, const OdeOptions& options = {},
                  const Route& route = {});

struct Displacement {
  Cx dx{}, dy{};
  std::array<Cx, 4> dt{};
};

/// Moves a field point by a small displacement with fixed-step integration
/// (times one by one with all four free, then x, then y). The result is a
/// smooth function of the displacement, as finite-difference stencils need.
FieldPoint move(const FieldPoint& p, const Displacement& d, int steps = 4);

/// One leg of a parallel transport: along x, or along t1 / t2 (index 0 or 1).
struct Leg {
  enum class Kind { X, T } kind = Kind::X;
  int index = 0;
  Cx to{};
};

struct Transported {
  SchlesingerState state;
  Cx x{};
  Mat2 phi;
};

/// Integrates Phi' = A(x) Phi along x-legs and Phi_t = -A_i/(x - t_i) Phi
/// together with the Schlesinger flow along t-legs, in the normalization of s.
Transported transport_phi(const SchlesingerState& s, Cx x0, const Mat2& phi0, const std::vector<Leg>& legs,
                          const OdeOptions& options = {});

/// S(t) = sum_{i<j} (theta_i theta_j / 2) log(t_i - t_j) on the tracked branch.
Cx gauge_exponent_S(const ThetaGO& theta, const std::array<Cx, 6>& log_tt);
/// Principal-branch log(t_i - t_j) in the pair order of FieldPoint::log_tt.
std::array<Cx, 6> principal_log_tt(const Times& t);
/// dS/dt_i = (theta_i / 2) sum_{j != i} theta_j / (t_i - t_j).
std::array<Cx, 4> gauge_S_derivative(const Times& t, const ThetaGO& theta);

/// M = tau Phi(x)^{-1} Phi(y). Throws NearSingularPhi when |det Phi(x)| < 1e-12.
Mat2 build_M(const FieldPoint& p);

/// Y = M / ((x - y) prod [(x - t_i)(y - t_i)]^{theta_i/2} e^S).
/// Throws DiagonalCollision when |x - y| < radius.
Mat2 gauge_to_Y(const Mat2& M, Cx x, Cx y, const std::array<Cx, 4>& log_xt, const std::array<Cx, 4>& log_yt,
                const ThetaGO& theta, Cx S, double radius = 1e-8);

Mat2 evaluate_Y(const FieldPoint& p);

/// Y with its first and second derivatives; y_t holds d/dt_i for i = 0..3.
struct YJet {
  Mat2 y, y_x, y_y, y_xx, y_yy;
  std::array<Mat2, 4> y_t;
};

/// Finite-difference jet of Y. Derivatives in t3, t4 are skipped (left zero)
/// unless with_outer_times is set.
YJet y_jet(const FieldPoint& p, const FDScheme& fd, bool with_outer_times = true);

/// The additive terms of one scalar equation applied entrywise; their sum is
/// the residual.
using Terms = std::vector<Mat2>;

struct EntryResidual {
  double abs = 0.0, rel = 0.0, scale = 0.0;
};

/// Worst matrix entry: abs = |sum of terms|, scale = largest term magnitude,
/// rel = abs / (scale + 1e-300).
EntryResidual worst_entry(const Terms& terms);

/// The two BPZ equations (in x and in y) and the two homogeneity equations.
std::array<Terms, 4> bpz_terms(const YJet& j, const FieldPoint& p);

/// The two quantized Garnier-Okamoto evolution equations at t3 = 1, t4 = 0.
std::array<Terms, 2> kevol_terms(const YJet& j, const FieldPoint& p);

struct PointResidual {
  Cx x{}, y{};
  double abs = 0.0, rel = 0.0;
};

struct ResidualReport {
  std::string equation_id;
  std::vector<PointResidual> points;
  double max_abs = 0.0;
  double max_rel = 0.0;
  /// Term scale at the point with the largest relative residual.
  double normalization = 0.0;
  FDScheme fd;

  void add(Cx x, Cx y, const EntryResidual& r);
};

struct GridPoint {
  Cx x{}, y{};
};

/// Seeded (x, y) grid in the lower half-plane around base_x with
/// Im x, Im y <= -0.3 and |x - y| >= 0.3.
std::vector<GridPoint> make_xy_grid(Cx base_x, std::size_t n, std::uint64_t seed);

std::array<ResidualReport, 4> bpz_residual(const Frame& frame, const std::vector<GridPoint>& grid, Cx t1, Cx t2,
                                           const FDScheme& fd = {}, const OdeOptions& options = {});
std::array<ResidualReport, 2> kevol_residual(const Frame& frame, const std::vector<GridPoint>& grid, Cx t1, Cx t2,
                                             const FDScheme& fd = {}, const OdeOptions& options = {});

std::array<Cx, 2> zeta_eta_map(Cx x, Cx y, Cx t1, Cx t2);

/// Inverts the (zeta, eta) map; of the two orderings of the root pair the one
/// closer to the hint is returned. Throws DegenerateJacobian or BranchAmbiguity.
std::array<Cx, 2> zeta_eta_inverse(Cx zeta, Cx eta, Cx t1, Cx t2, std::array<Cx, 2> hint);

enum class AlphaBranch { Zero, Neg };
enum class BetaBranch { Small, Large };

struct AlphaBeta {
  Cx alpha{}, beta{};
  AlphaBranch branch = AlphaBranch::Zero;
};

/// alpha in {0, -theta_4}; beta from the quadratic tying (alpha, beta) to bpz_lambda.
AlphaBeta solve_alpha_beta(const ThetaGO& theta, AlphaBranch a, BetaBranch b = BetaBranch::Small);

/// V = Y / ((xy)^alpha (x - 1)^beta (y - 1)^beta) from tracked logarithms.
Mat2 V_from_Y(const Mat2& Y, const std::array<Cx, 4>& log_xt, const std::array<Cx, 4>& log_yt, const AlphaBeta& ab);
Mat2 evaluate_V(const FieldPoint& p, const AlphaBeta& ab);

/// V and its derivatives in (zeta, eta) and in t1, t2 at fixed (zeta, eta).
struct VJet {
  Mat2 v, v_z, v_e, v_zz, v_ze, v_ee, v_t1, v_t2;
};
VJet v_jet(const FieldPoint& p, const AlphaBeta& ab, const FDScheme& fd);

std::array<Terms, 2> quantized_pg_terms(const VJet& j, Cx zeta, Cx eta, Cx t1, Cx t2, const ThetaGO& theta,
                                        const AlphaBeta& ab);

std::array<ResidualReport, 2> quantized_pg_residual(const Frame& frame, const std::vector<GridPoint>& grid, Cx t1,
                                                    Cx t2, const AlphaBeta& ab, const FDScheme& fd = {},
                                                    const OdeOptions& options = {});

/// Column j of Z = Phi prod (x - t_i)^{theta_i/2} and its x-derivatives, first row only.
struct ZJet {
  Cx z, z_x, z_xx;
};
ZJet z_jet(const FieldPoint& p, int column, const FDScheme& fd);

struct GarxReport {
  ResidualReport equation;
  /// Abel identity W' = coef_zprime W for the Wronskian of the two columns.
  ResidualReport abel;
};

/// Scalar second-order equation for the first row of Z, with coefficients from
/// the GO state extracted at (t1, t2).
GarxReport garx_residual(const Frame& frame, Cx t1, Cx t2, const std::vector<Cx>& x_samples, const FDScheme& fd = {},
                         const OdeOptions& options = {});

}  // namespace garnier::quantize
