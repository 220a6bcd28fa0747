#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "garnier/mat2.hpp"

namespace garnier {

using CVec = std::vector<Cx>;

/// A declared singular locus: the set of points z with sum_k coeffs[k]*z[k] == value.
/// Covers isolated points of a 1-D path (coeffs = {1}), coordinate hyperplanes such
/// as t1 = 0, and diagonals such as t1 = t2 (coeffs = {1, -1}, value = 0).
struct Singularity {
  CVec coeffs;
  Cx value;
  std::string label;

  static Singularity point(Cx z, std::string label = {});
  static Singularity coordinate(std::size_t dim, std::size_t k, Cx value, std::string label = {});
  static Singularity diagonal(std::size_t dim, std::size_t i, std::size_t j, std::string label = {});

  /// |sum coeffs*z - value| at a point.
  double distance(std::span<const Cx> z) const;
  /// Minimal distance to the locus (in the functional sense above) along the segment a -> b.
  double segment_distance(std::span<const Cx> a, std::span<const Cx> b) const;
};

/// Polyline integration contour in C^d (d = 1 or 2 in practice). The global
/// parameter sigma runs over [0, segments()]; segment k is sigma in [k, k+1].
struct PathPlan {
  std::vector<CVec> waypoints;
  double exclusion_radius = 0.05;
  std::vector<Singularity> singular;

  static PathPlan line(CVec from, CVec to, double exclusion_radius = 0.05);

  std::size_t dim() const { return waypoints.empty() ? 0 : waypoints.front().size(); }
  std::size_t segments() const { return waypoints.size() < 2 ? 0 : waypoints.size() - 1; }
  CVec point(double sigma) const;
  /// d point / d sigma on the segment containing sigma.
  CVec tangent(double sigma) const;
  double length() const;

  /// Throws InvalidPath when waypoints are inconsistent or a segment comes
  /// closer than exclusion_radius to a declared singular locus.
  void validate() const;
};

struct OdeOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  /// Step below this fraction of a segment is treated as a singularity approach.
  double min_step = 1e-13;
  std::size_t max_steps = 2'000'000;
  /// Global path parameters at which dense output is requested.
  std::vector<double> samples;
};

/// dy/dsigma given the current path point, its tangent dz/dsigma, and state y.
using Field = std::function<void(std::span<const Cx> point, std::span<const Cx> tangent,
                                 std::span<const Cx> y, std::span<Cx> dy)>;

struct Trajectory {
  std::vector<double> sigma;
  std::vector<CVec> points;
  std::vector<CVec> states;
  std::vector<double> sample_sigma;
  std::vector<CVec> sample_states;
  std::size_t rejected_steps = 0;

  const CVec& final_state() const { return states.back(); }
};

/// Adaptive Dormand-Prince 5(4) integration along a validated polyline, with
/// per-component local error control |err_i| <= atol + rtol*|y_i| and the
/// standard fourth-order continuous extension for requested samples.
Trajectory ode_integrate(const Field& field, const CVec& y0, const PathPlan& path,
                         const OdeOptions& options = {});

/// Fixed-step integration along the straight segment from -> to using the
/// fifth-order Dormand-Prince weights. The result is a smooth function of the
/// endpoints, which is what finite-difference stencils built on it rely on.
CVec rk_fixed(const Field& field, CVec y, std::span<const Cx> from, std::span<const Cx> to,
              int steps);

}  // namespace garnier
