#include "garnier/okamoto.hpp"

#include <algorithm>
#include <sstream>

#include "garnier/error.hpp"
#include "garnier/roots.hpp"

namespace garnier::okamoto {

using schlesinger::Norm;
using schlesinger::ShiftDir;

namespace {

SchlesingerState as_q(const SchlesingerState& s) {
  return s.norm == Norm::Q ? s : schlesinger::shift_normalization(s, ShiftDir::BtoQ);
}

bool lex_less(Cx a, Cx b) { return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag()); }

void check_go_times(Cx t1, Cx t2) { schlesinger::check_times({t1, t2, 1.0, 0.0}); }

}  // namespace

Cx q12_at(const SchlesingerState& q, Cx x) {
  const auto t = q.times();
  Cx v = 0.0;
  for (int i = 0; i < 4; ++i) v += q.A[i].a12 / (x - t[i]);
  return v;
}

LambdaResult extract_lambda(const SchlesingerState& s, const std::array<Cx, 2>* previous) {
  const SchlesingerState q = as_q(s);
  const auto t = q.times();
  // Numerator sum_i q12^i prod_{j != i} (x - t_j) = c3 x^3 + c2 x^2 + c1 x + c0.
  Cx c3 = 0.0, c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double scale = 0.0;
  for (int i = 0; i < 4; ++i) {
    Cx e1 = 0.0, e2 = 0.0, e3 = 1.0;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      e2 += e1 * t[j];
      e1 += t[j];
      e3 *= t[j];
    }
    const Cx w = q.A[i].a12;
    c3 += w;
    c2 -= w * e1;
    c1 += w * e2;
    c0 -= w * e3;
    scale = std::max(scale, std::abs(w) * (1.0 + std::abs(t[i])));
  }
  if (scale == 0.0) fail(ErrorKind::ConditionIIIViolated, "q12 vanishes identically");
  if (std::abs(c3) > 1e-8 * scale) {
    fail(ErrorKind::ConfigInvalid, "residue sum is not diagonal; the state is not in the diagonal-infinity case");
  }
  Cx X = 0.0;
  for (int i = 0; i < 4; ++i) X += t[i] * q.A[i].a12;
  if (std::abs(X) < 1e-12 * scale) {
    fail(ErrorKind::ConditionIIIViolated, "leading coefficient X = sum t_i q12^i vanishes");
  }
  auto r = quad_roots(X, c1, c0);
  if (std::abs(r[0] - r[1]) <= 1e-10 * (1.0 + std::abs(r[0]) + std::abs(r[1]))) {
    fail(ErrorKind::ConditionIVViolated, "zeros of q12 coincide");
  }
  if (previous) {
    const double keep = std::abs(r[0] - (*previous)[0]) + std::abs(r[1] - (*previous)[1]);
    const double swap = std::abs(r[1] - (*previous)[0]) + std::abs(r[0] - (*previous)[1]);
    if (swap < keep) std::swap(r[0], r[1]);
  } else if (lex_less(r[1], r[0])) {
    std::swap(r[0], r[1]);
  }
  return {{r[0], r[1]}, X};
}

Cx extract_mu(const SchlesingerState& s, Cx lambda) {
  const SchlesingerState q = as_q(s);
  const auto t = q.times();
  Cx mu = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(lambda - t[i]) < 1e-12 * (1.0 + std::abs(t[i]))) {
      fail(ErrorKind::PoleEvaluation, "lambda coincides with t" + std::to_string(i + 1));
    }
    mu += q.A[i].a11 / (lambda - t[i]);
  }
  return mu;
}

GOState extract_go(const SchlesingerState& s, const std::array<Cx, 2>* previous) {
  const SchlesingerState q = as_q(s);
  GOState g;
  g.t1 = q.t1;
  g.t2 = q.t2;
  g.params = q.theta;
  g.lambda = extract_lambda(q, previous).lambda;
  for (int k = 0; k < 2; ++k) g.mu[k] = extract_mu(q, g.lambda[k]);
  return g;
}

std::vector<GOState> extract_along(const std::vector<SchlesingerState>& states) {
  std::vector<GOState> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(extract_go(s, out.empty() ? nullptr : &out.back().lambda));
  return out;
}

Cx hamiltonian_K(int i, const GOState& g) {
  if (i != 1 && i != 2) fail(ErrorKind::ConfigInvalid, "Hamiltonian index must be 1 or 2");
  check_go_times(g.t1, g.t2);
  const auto& l = g.lambda;
  const auto& m = g.mu;
  if (std::abs(l[0] - l[1]) <= 1e-12 * (1.0 + std::abs(l[0]))) {
    fail(ErrorKind::ConditionIVViolated, "lambda1 = lambda2");
  }
  const std::array<Cx, 2> T{g.t1, g.t2};
  const auto& th = g.params.theta;
  const Cx kappa = g.params.kappa();
  const int a = i - 1, b = 2 - i;
  const Cx Mi = -(l[0] - T[a]) * (l[1] - T[a]) / ((T[a] - T[b]) * (T[a] - 1.0) * T[a]);
  Cx sum = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Cx lk = l[k];
    const Cx Mki = (lk - T[b]) * (lk - 1.0) * lk / (lk - l[1 - k]);
    Cx lin = th[2] / (lk - 1.0) + th[3] / lk;
    for (int n = 0; n < 2; ++n) lin += (th[n] - (n == a ? 1.0 : 0.0)) / (lk - T[n]);
    sum += Mki * (m[k] * m[k] - lin * m[k] + kappa / (lk * (lk - 1.0)));
  }
  return Mi * sum;
}

GOField go_vector_field(const GOState& g, const FDScheme& fd) {
  GOField f;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k < 2; ++k) {
      auto along_mu = [&](double d) {
        GOState h = g;
        h.mu[k] += d;
        return hamiltonian_K(j + 1, h);
      };
      auto along_lambda = [&](double d) {
        GOState h = g;
        h.lambda[k] += d;
        return hamiltonian_K(j + 1, h);
      };
      f.dlambda[j][k] = fd_offset_derivative(along_mu, fd.step_at(g.mu[k]), fd);
      f.dmu[j][k] = -fd_offset_derivative(along_lambda, fd.step_at(g.lambda[k]), fd);
    }
  }
  return f;
}

GOTrajectory integrate_go(const GOState& g0, const PathPlan& path, const OdeOptions& options, const FDScheme& fd) {
  if (path.dim() != 2) fail(ErrorKind::InvalidPath, "GO paths live in (t1, t2)");
  const ThetaGO params = g0.params;
  Field field = [&](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> y, std::span<Cx> dy) {
    GOState g{p[0], p[1], {y[0], y[1]}, {y[2], y[3]}, params};
    const GOField f = go_vector_field(g, fd);
    for (int k = 0; k < 2; ++k) {
      dy[k] = d[0] * f.dlambda[0][k] + d[1] * f.dlambda[1][k];
      dy[2 + k] = d[0] * f.dmu[0][k] + d[1] * f.dmu[1][k];
    }
  };
  const auto traj = ode_integrate(field, {g0.lambda[0], g0.lambda[1], g0.mu[0], g0.mu[1]}, path, options);
  GOTrajectory out;
  out.rejected_steps = traj.rejected_steps;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const auto& y = traj.states[k];
    out.sigma.push_back(traj.sigma[k]);
    out.states.push_back({traj.points[k][0], traj.points[k][1], {y[0], y[1]}, {y[2], y[3]}, params});
  }
  return out;
}

GarxCoefficients garx_coefficients(const GOState& g, Cx K1, Cx K2, Cx x) {
  const std::array<Cx, 4> t{g.t1, g.t2, 1.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    if (std::abs(x - t[i]) < 1e-12) fail(ErrorKind::PoleEvaluation, "x at t" + std::to_string(i + 1));
  }
  for (int k = 0; k < 2; ++k) {
    if (std::abs(x - g.lambda[k]) < 1e-12) fail(ErrorKind::PoleEvaluation, "x at an apparent singularity");
  }
  const auto& th = g.params.theta;
  GarxCoefficients c;
  c.coef_zprime = 0.0;
  for (int i = 0; i < 4; ++i) c.coef_zprime += (th[i] - 1.0) / (x - t[i]);
  for (int k = 0; k < 2; ++k) c.coef_zprime += 1.0 / (x - g.lambda[k]);
  const Cx xx1 = x * (x - 1.0);
  const std::array<Cx, 2> K{K1, K2};
  Cx bracket = g.params.kappa() / xx1;
  for (int i = 0; i < 2; ++i) bracket -= t[i] * (t[i] - 1.0) * K[i] / (xx1 * (x - t[i]));
  for (int k = 0; k < 2; ++k) {
    const Cx lk = g.lambda[k];
    bracket += lk * (lk - 1.0) * g.mu[k] / (xx1 * (x - lk));
  }
  c.coef_z = -bracket;
  return c;
}

double cross_picture_mismatch(const SchlesingerState& s, double h, const FDScheme& fd) {
  const GOState g0 = extract_go(s);
  const GOField field = go_vector_field(g0, fd);
  double worst = 0.0;
  for (int j = 0; j < 2; ++j) {
    auto coords = [&](double d, int which) {
      const GOState g = extract_go(schlesinger::hop(s, j, d), &g0.lambda);
      return which < 2 ? g.lambda[which] : g.mu[which - 2];
    };
    std::array<Cx, 4> fdv, exact;
    for (int c = 0; c < 4; ++c) {
      fdv[c] = fd_offset_derivative([&](double d) { return coords(d, c); }, h, fd);
      exact[c] = c < 2 ? field.dlambda[j][c] : field.dmu[j][c - 2];
    }
    double scale = 0.0, err = 0.0;
    for (int c = 0; c < 4; ++c) {
      scale = std::max(scale, std::abs(exact[c]));
      err = std::max(err, std::abs(fdv[c] - exact[c]));
    }
    worst = std::max(worst, err / std::max(scale, 1e-300));
  }
  return worst;
}

bool exponents_non_integer(const ThetaGO& th, double tol) {
  auto near_int = [tol](Cx z) { return std::abs(z.imag()) < tol && std::abs(z.real() - std::round(z.real())) < tol; };
  for (const Cx t : th.theta)
    if (near_int(t)) return false;
  return true;
}

}  // namespace garnier::okamoto
