#include "garnier/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "garnier/error.hpp"

namespace garnier {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension.
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

std::string describe(std::span<const Cx> z) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z[i];
  os << ")";
  return os.str();
}

bool all_finite(std::span<const Cx> v) {
  return std::all_of(v.begin(), v.end(), [](Cx z) { return is_finite(z); });
}

/// One Dormand-Prince stepper along a straight segment z(s) = from + s * (to - from).
class Stepper {
 public:
  Stepper(const Field& field, std::span<const Cx> from, std::span<const Cx> to, std::size_t n)
      : field_(field), from_(from.begin(), from.end()), dir_(from.size()), pt_(from.size()), n_(n) {
    for (std::size_t i = 0; i < dir_.size(); ++i) dir_[i] = to[i] - from[i];
    for (auto* k : {&k1, &k2, &k3, &k4, &k5, &k6, &k7}) k->assign(n, Cx{});
    tmp.assign(n, Cx{});
    y1.assign(n, Cx{});
  }

  void eval(double s, std::span<const Cx> y, std::span<Cx> dy) {
    for (std::size_t i = 0; i < pt_.size(); ++i) pt_[i] = from_[i] + s * dir_[i];
    field_(pt_, dir_, y, dy);
  }

  CVec point(double s) const {
    CVec p(from_.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = from_[i] + s * dir_[i];
    return p;
  }

  /// Computes y1 and the stages from y0 with k1 = f(s, y0) already set.
  void step(double s, double h, std::span<const Cx> y0) {
    for (std::size_t i = 0; i < n_; ++i) tmp[i] = y0[i] + h * (a21 * k1[i]);
    eval(s + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n_; ++i) tmp[i] = y0[i] + h * (a31 * k1[i] + a32 * k2[i]);
    eval(s + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n_; ++i)
      tmp[i] = y0[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    eval(s + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n_; ++i)
      tmp[i] = y0[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    eval(s + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n_; ++i)
      tmp[i] = y0[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    eval(s + h, tmp, k6);
    for (std::size_t i = 0; i < n_; ++i)
      y1[i] = y0[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    eval(s + h, y1, k7);
  }

  double error_norm(double h, std::span<const Cx> y0, const OdeOptions& opt) const {
    if (!all_finite(y1) || !all_finite(k7)) return std::numeric_limits<double>::infinity();
    double err = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const Cx e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      err = std::max(err, std::abs(e) / sc);
    }
    return err;
  }

  /// Dense output at fraction theta in [0, 1] of the last step.
  CVec dense(double theta, double h, std::span<const Cx> y0) const {
    CVec out(n_);
    const double th1 = 1.0 - theta;
    for (std::size_t i = 0; i < n_; ++i) {
      const Cx r2 = y1[i] - y0[i];
      const Cx r3 = h * k1[i] - r2;
      const Cx r4 = r2 - h * k7[i] - r3;
      const Cx r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
      out[i] = y0[i] + theta * (r2 + th1 * (r3 + theta * (r4 + th1 * r5)));
    }
    return out;
  }

  CVec k1, k2, k3, k4, k5, k6, k7, tmp, y1;

 private:
  const Field& field_;
  CVec from_, dir_, pt_;
  std::size_t n_;
};

}  // namespace

Singularity Singularity::point(Cx z, std::string label) { return {CVec{1.0}, z, std::move(label)}; }

Singularity Singularity::coordinate(std::size_t dim, std::size_t k, Cx value, std::string label) {
  CVec c(dim, 0.0);
  c[k] = 1.0;
  return {std::move(c), value, std::move(label)};
}

Singularity Singularity::diagonal(std::size_t dim, std::size_t i, std::size_t j, std::string label) {
  CVec c(dim, 0.0);
  c[i] = 1.0;
  c[j] = -1.0;
  return {std::move(c), 0.0, std::move(label)};
}

double Singularity::distance(std::span<const Cx> z) const {
  Cx f = -value;
  for (std::size_t k = 0; k < coeffs.size(); ++k) f += coeffs[k] * z[k];
  return std::abs(f);
}

double Singularity::segment_distance(std::span<const Cx> a, std::span<const Cx> b) const {
  Cx fa = -value, fb = -value;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    fa += coeffs[k] * a[k];
    fb += coeffs[k] * b[k];
  }
  // Distance from the origin to the complex segment [fa, fb].
  const Cx d = fb - fa;
  const double dd = std::norm(d);
  if (dd == 0.0) return std::abs(fa);
  const double s = std::clamp(-(std::conj(d) * fa).real() / dd, 0.0, 1.0);
  return std::abs(fa + s * d);
}

PathPlan PathPlan::line(CVec from, CVec to, double exclusion_radius) {
  PathPlan p;
  p.waypoints = {std::move(from), std::move(to)};
  p.exclusion_radius = exclusion_radius;
  return p;
}

CVec PathPlan::point(double sigma) const {
  const std::size_t nseg = segments();
  std::size_t k = std::min(static_cast<std::size_t>(std::max(sigma, 0.0)), nseg - 1);
  const double s = sigma - static_cast<double>(k);
  CVec p(dim());
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] = waypoints[k][i] + s * (waypoints[k + 1][i] - waypoints[k][i]);
  return p;
}

CVec PathPlan::tangent(double sigma) const {
  const std::size_t nseg = segments();
  std::size_t k = std::min(static_cast<std::size_t>(std::max(sigma, 0.0)), nseg - 1);
  CVec d(dim());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = waypoints[k + 1][i] - waypoints[k][i];
  return d;
}

double PathPlan::length() const {
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    double sq = 0.0;
    for (std::size_t i = 0; i < dim(); ++i) sq += std::norm(waypoints[k + 1][i] - waypoints[k][i]);
    len += std::sqrt(sq);
  }
  return len;
}

void PathPlan::validate() const {
  if (waypoints.size() < 2) fail(ErrorKind::InvalidPath, "a path needs at least two waypoints");
  if (!(exclusion_radius > 0.0)) fail(ErrorKind::InvalidPath, "exclusion radius must be positive");
  const std::size_t d = dim();
  for (const auto& w : waypoints) {
    if (w.size() != d) fail(ErrorKind::InvalidPath, "waypoints of mixed dimension");
    if (!all_finite(w)) fail(ErrorKind::InvalidPath, "non-finite waypoint");
  }
  for (const auto& s : singular) {
    if (s.coeffs.size() != d) fail(ErrorKind::InvalidPath, "singular locus has wrong dimension");
  }
  for (std::size_t k = 0; k + 1 < waypoints.size(); ++k) {
    bool distinct = false;
    for (std::size_t i = 0; i < d; ++i) distinct |= waypoints[k][i] != waypoints[k + 1][i];
    if (!distinct) fail(ErrorKind::InvalidPath, "consecutive waypoints coincide at index " + std::to_string(k));
    for (const auto& s : singular) {
      const double dist = s.segment_distance(waypoints[k], waypoints[k + 1]);
      if (dist < exclusion_radius) {
        fail(ErrorKind::InvalidPath, "segment " + std::to_string(k) + " passes within " +
                                         std::to_string(dist) + " of singular locus '" + s.label +
                                         "'");
      }
    }
  }
}

Trajectory ode_integrate(const Field& field, const CVec& y0, const PathPlan& path,
                         const OdeOptions& options) {
  path.validate();
  const std::size_t n = y0.size();
  Trajectory traj;
  traj.sigma.push_back(0.0);
  traj.points.push_back(path.waypoints.front());
  traj.states.push_back(y0);

  std::vector<double> samples = options.samples;
  std::sort(samples.begin(), samples.end());
  std::size_t next_sample = 0;
  auto emit_until = [&](double sigma_hi, auto&& value_at) {
    while (next_sample < samples.size() && samples[next_sample] <= sigma_hi) {
      traj.sample_sigma.push_back(samples[next_sample]);
      traj.sample_states.push_back(value_at(samples[next_sample]));
      ++next_sample;
    }
  };
  emit_until(0.0, [&](double) { return y0; });

  CVec y = y0;
  double h = 0.0;
  std::size_t steps = 0;
  for (std::size_t seg = 0; seg < path.segments(); ++seg) {
    Stepper st(field, path.waypoints[seg], path.waypoints[seg + 1], n);
    st.eval(0.0, y, st.k1);
    if (!all_finite(st.k1)) {
      fail(ErrorKind::SingularityApproach, "non-finite field at " + describe(path.waypoints[seg]));
    }
    if (h == 0.0) {
      double ny = 0.0, nf = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ny = std::max(ny, std::abs(y[i]));
        nf = std::max(nf, std::abs(st.k1[i]));
      }
      h = (ny < 1e-5 || nf < 1e-5) ? 1e-3 : 0.01 * ny / nf;
      h = std::clamp(h * std::pow(options.rtol / 1e-6, 0.2), 1e-6, 0.1);
    }
    double s = 0.0;
    while (s < 1.0) {
      if (++steps > options.max_steps) {
        fail(ErrorKind::SingularityApproach, "step budget exhausted near " + describe(st.point(s)));
      }
      bool last = false;
      if (s + h >= 1.0) {
        h = 1.0 - s;
        last = true;
      }
      st.step(s, h, y);
      const double err = st.error_norm(h, y, options);
      if (!(err <= 1.0)) {
        ++traj.rejected_steps;
        const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
        h *= fac;
        if (h < options.min_step) {
          fail(ErrorKind::SingularityApproach,
               "step size underflow near " + describe(st.point(s)) + " (segment " +
                   std::to_string(seg) + ")");
        }
        continue;
      }
      const double sigma0 = static_cast<double>(seg) + s;
      const double hh = h;
      const CVec y_old = y;
      emit_until(sigma0 + hh, [&](double sig) {
        const double theta = std::clamp((sig - sigma0) / hh, 0.0, 1.0);
        return st.dense(theta, hh, y_old);
      });
      y = st.y1;
      std::swap(st.k1, st.k7);
      s = last ? 1.0 : s + h;
      traj.sigma.push_back(static_cast<double>(seg) + s);
      traj.points.push_back(st.point(s));
      traj.states.push_back(y);
      const double fac = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      if (!last) h *= fac;
    }
    // Carry the step over to the next segment in proportion to its length.
    if (seg + 2 < path.waypoints.size()) {
      double l0 = 0.0, l1 = 0.0;
      for (std::size_t i = 0; i < path.dim(); ++i) {
        l0 += std::norm(path.waypoints[seg + 1][i] - path.waypoints[seg][i]);
        l1 += std::norm(path.waypoints[seg + 2][i] - path.waypoints[seg + 1][i]);
      }
      h = std::clamp(h * std::sqrt(l0 / l1), 1e-6, 0.1);
    }
  }
  emit_until(std::numeric_limits<double>::infinity(), [&](double) { return y; });
  return traj;
}

CVec rk_fixed(const Field& field, CVec y, std::span<const Cx> from, std::span<const Cx> to,
              int steps) {
  Stepper st(field, from, to, y.size());
  const double h = 1.0 / steps;
  st.eval(0.0, y, st.k1);
  for (int k = 0; k < steps; ++k) {
    st.step(k * h, h, y);
    y = st.y1;
    std::swap(st.k1, st.k7);
  }
  return y;
}

}  // namespace garnier
