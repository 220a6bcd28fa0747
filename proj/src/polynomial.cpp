#include "garnier/polynomial.hpp"

#include <algorithm>

#include "garnier/error.hpp"
#include "garnier/rng.hpp"
#include "garnier/roots.hpp"

namespace garnier::polynomial {

namespace {

/// Hamiltonian with "i" the first index; i = 1 is the displayed formula.
Cx hgar(Cx ti, Cx tj, Cx qi, Cx qj, Cx pi, Cx pj, Cx Ti, Cx Tj, const ThetaPG& th) {
  const Cx th0 = th.th0, th1 = th.th1, ti2 = th.thinf2;
  const Cx v = qi * (qi - 1.0) * (qi - ti) * pi * pi +
               ((th0 + Tj + 1.0) * qi * (qi - 1.0) - (2.0 * ti2 + th1 + th0 + Ti + Tj + 1.0) * qi * (qi - ti) +
                Ti * (qi - 1.0) * (qi - ti)) *
                   pi +
               ti2 * (ti2 + th1) * qi + (2.0 * qi * pi + qj * pj - th1 - 2.0 * ti2) * qi * qj * pj -
               (ti * (ti - 1.0) * (pi * qi + Ti) * pi * qj - ti * (tj - 1.0) * (2.0 * pi * qi + Ti) * pj * qj +
                tj * (ti - 1.0) * qi * (pj * pj * qj + Tj * (pj - pi))) /
                   (ti - tj);
  return v / (ti * (ti - 1.0));
}

/// Solves a small dense complex system by Gaussian elimination with partial pivoting.
template <std::size_t N>
std::array<Cx, N> solve(std::array<std::array<Cx, N>, N> a, std::array<Cx, N> b) {
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < N; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (std::abs(a[piv][c]) < 1e-300) fail(ErrorKind::DegenerateJacobian, "singular Newton matrix");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < N; ++r) {
      const Cx f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < N; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::array<Cx, N> x{};
  for (std::size_t c = N; c-- > 0;) {
    Cx v = b[c];
    for (std::size_t k = c + 1; k < N; ++k) v -= a[c][k] * x[k];
    x[c] = v / a[c][c];
  }
  return x;
}

}  // namespace

void check_pg_times(Cx t1, Cx t2) { schlesinger::check_times({t1, t2, 1.0, 0.0}); }

Cx hamiltonian_HGar(int i, const PGState& s) {
  check_pg_times(s.t1, s.t2);
  const auto& th = s.params;
  if (i == 1) return hgar(s.t1, s.t2, s.q[0], s.q[1], s.p[0], s.p[1], th.tht1, th.tht2, th);
  if (i == 2) return hgar(s.t2, s.t1, s.q[1], s.q[0], s.p[1], s.p[0], th.tht2, th.tht1, th);
  fail(ErrorKind::ConfigInvalid, "Hamiltonian index must be 1 or 2");
}

ExplicitTerms explicit_terms(const PGState& s) {
  check_pg_times(s.t1, s.t2);
  const auto& th = s.params;
  const Cx ti = s.t1, tj = s.t2, qi = s.q[0], qj = s.q[1], pi = s.p[0], pj = s.p[1];
  const Cx Ti = th.tht1, Tj = th.tht2, th0 = th.th0, th1 = th.th1, ti2 = th.thinf2;
  const Cx c = th1 + 2.0 * ti2, D = ti - tj;
  ExplicitTerms e;
  e.oqo = 2.0 * pi * qi * ((qi - 1.0) * (qi - ti) - ti * (ti - 1.0) / D * qj) +
          2.0 * pj * qi * qj * (qi + ti * (tj - 1.0) / D) - c * qi * qi - (1.0 + th0 + Ti + Tj) * qi +
          (1.0 + c + th0 + Tj) * ti * qi + ti * Ti + (ti - 1.0) / D * (tj * Tj * qi - ti * Ti * qj);
  e.opo = 2.0 * pi * qi * qj * (qi + ti * (tj - 1.0) / D) + 2.0 * pj * qi * qj * (qj - tj * (ti - 1.0) / D) -
          c * qi * qj - (tj * (ti - 1.0) * Tj * qi - ti * (tj - 1.0) * Ti * qj) / D;
  e.oppo = -pi * pi * (3.0 * qi * qi - 2.0 * (ti + 1.0) * qi + ti - ti * (ti - 1.0) / D * qj) -
           2.0 * pj * pi * qj * (2.0 * qi + ti * (tj - 1.0) / D) - pj * pj * qj * (qj - tj * (ti - 1.0) / D) +
           pi * (2.0 * c * qi + (1.0 + th0 + Ti + Tj) - (1.0 + c + th0 + Tj) * ti - tj * (ti - 1.0) * Tj / D) +
           pj * (c * qj + tj * (ti - 1.0) * Tj / D) - ti2 * (ti2 + th1);
  e.opt = pi * pi * qi * ti * (ti - 1.0) / D - 2.0 * pj * pi * qi * (qi + ti * (tj - 1.0) / D) -
          pj * pj * qi * (2.0 * qj - tj * (ti - 1.0) / D) + pi * Ti * ti * (ti - 1.0) / D +
          pj * (c * qi - ti * (tj - 1.0) * Ti / D);
  e.tqo = 2.0 * pi * qi * qj * (qi + ti * (tj - 1.0) / D) + 2.0 * pj * qi * qj * (qj - tj * (ti - 1.0) / D) -
          c * qi * qj - (tj * (ti - 1.0) * Tj * qi - ti * (tj - 1.0) * Ti * qj) / D;
  e.tqt = 2.0 * pi * qi * qj * (qj - tj * (ti - 1.0) / D) +
          2.0 * pj * qj * ((qj - 1.0) * (qj - tj) + tj * (tj - 1.0) / D * qi) - c * qj * qj -
          (1.0 + th0 + Ti + Tj) * qj + (1.0 + c + th0 + Ti) * tj * qj + tj * Tj +
          (tj - 1.0) / D * (tj * Tj * qi - ti * Ti * qj);
  e.tpo = -pi * pi * qj * (2.0 * qi + ti * (tj - 1.0) / D) - 2.0 * pj * pi * qj * (qj - tj * (ti - 1.0) / D) -
          pj * pj * qj * tj * (tj - 1.0) / D + pi * (c * qj + tj * (ti - 1.0) * Tj / D) -
          pj * Tj * tj * (tj - 1.0) / D;
  e.tpt = -pi * pi * qi * (qi + ti * (tj - 1.0) / D) - 2.0 * pj * pi * qi * (2.0 * qj - tj * (ti - 1.0) / D) -
          pj * pj * (3.0 * qj * qj - 2.0 * qj * (tj + 1.0) + tj + tj * (tj - 1.0) / D * qi) +
          pi * (c * qi - ti * (tj - 1.0) * Ti / D) +
          pj * (2.0 * c * qj + (1.0 + th0 + Ti + Tj) - (1.0 + c + th0 + Ti) * tj + ti * (tj - 1.0) * Ti / D) -
          ti2 * (ti2 + th1);
  return e;
}

PGRhs pg_rhs_explicit(const PGState& s) {
  const ExplicitTerms e = explicit_terms(s);
  const Cx n1 = s.t1 * (s.t1 - 1.0), n2 = s.t2 * (s.t2 - 1.0);
  return {{e.oqo / n1, e.opo / n1, e.oppo / n1, e.opt / n1}, {e.tqo / n2, e.tqt / n2, e.tpo / n2, e.tpt / n2}};
}

PGRhs pg_rhs_from_hamiltonian(const PGState& s, const FDScheme& fd) {
  PGRhs r;
  for (int i = 1; i <= 2; ++i) {
    auto& d = i == 1 ? r.d_t1 : r.d_t2;
    for (int j = 0; j < 2; ++j) {
      auto along_p = [&](double h) {
        PGState m = s;
        m.p[j] += h;
        return hamiltonian_HGar(i, m);
      };
      auto along_q = [&](double h) {
        PGState m = s;
        m.q[j] += h;
        return hamiltonian_HGar(i, m);
      };
      d[j] = fd_offset_derivative(along_p, fd.step_at(s.p[j]), fd);
      d[2 + j] = -fd_offset_derivative(along_q, fd.step_at(s.q[j]), fd);
    }
  }
  return r;
}

std::array<Cx, 2> u_logderiv(const PGState& s) {
  check_pg_times(s.t1, s.t2);
  const auto& th = s.params;
  const std::array<Cx, 2> t{s.t1, s.t2};
  std::array<Cx, 2> d;
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    const Cx qi = s.q[i], pi = s.p[i];
    d[i] = (qi * (2.0 * pi * (t[i] - qi) + th.th1 + 2.0 * th.thinf2) - 2.0 * qi * s.p[j] * s.q[j] + t[i] * th.tht(i)) /
           (t[i] * (t[i] - 1.0));
  }
  return d;
}

namespace {

Field pg_field(const ThetaPG& th) {
  return [th](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> y, std::span<Cx> dy) {
    const PGState s{p[0], p[1], {y[0], y[1]}, {y[2], y[3]}, th};
    const PGRhs r = pg_rhs_explicit(s);
    for (int k = 0; k < 4; ++k) dy[k] = d[0] * r.d_t1[k] + d[1] * r.d_t2[k];
    const auto lu = u_logderiv(s);
    dy[4] = y[4] * (d[0] * lu[0] + d[1] * lu[1]);
  };
}

}  // namespace

PGHop pg_hop(const PGState& s, Cx u, int i, Cx delta, int steps) {
  if (i != 1 && i != 2) fail(ErrorKind::ConfigInvalid, "hop index must be 1 or 2");
  const CVec from{s.t1, s.t2};
  CVec to = from;
  to[i - 1] += delta;
  const CVec y = rk_fixed(pg_field(s.params), {s.q[0], s.q[1], s.p[0], s.p[1], u}, from, to, steps);
  return {{to[0], to[1], {y[0], y[1]}, {y[2], y[3]}, s.params}, y[4]};
}

PGTrajectory integrate_pg(const PGState& s0, const PathPlan& path, const OdeOptions& options, Cx u0) {
  if (path.dim() != 2) fail(ErrorKind::InvalidPath, "polynomial Garnier paths live in (t1, t2)");
  const ThetaPG th = s0.params;
  auto state_of = [&](std::span<const Cx> p, std::span<const Cx> y) {
    return PGState{p[0], p[1], {y[0], y[1]}, {y[2], y[3]}, th};
  };
  const Field field = pg_field(th);
  const auto traj = ode_integrate(field, {s0.q[0], s0.q[1], s0.p[0], s0.p[1], u0}, path, options);
  PGTrajectory out;
  out.rejected_steps = traj.rejected_steps;
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out.sigma.push_back(traj.sigma[k]);
    out.states.push_back(state_of(traj.points[k], traj.states[k]));
    out.u.push_back(traj.states[k][4]);
  }
  for (std::size_t k = 0; k < traj.sample_states.size(); ++k) {
    out.sample_sigma.push_back(traj.sample_sigma[k]);
    out.samples.push_back(state_of(path.point(traj.sample_sigma[k]), traj.sample_states[k]));
    out.sample_u.push_back(traj.sample_states[k][4]);
  }
  for (const Cx u : out.u) {
    if (!(std::abs(u) > 0.0)) fail(ErrorKind::ZeroGauge, "gauge u vanished along the path");
  }
  return out;
}

std::array<Mat2, 4> ahat_matrices(const PGState& s) {
  check_pg_times(s.t1, s.t2);
  const auto& th = s.params;
  const Cx sp = s.p[0] * s.q[0] + s.p[1] * s.q[1];
  const Mat2 a0{th.th0, -1.0 + s.q[0] / s.t1 + s.q[1] / s.t2, 0.0, 0.0};
  const Mat2 a1{th.th1 + th.thinf2 - sp, 1.0, (sp - th.thinf2) * (th.th1 + th.thinf2 - sp), sp - th.thinf2};
  const std::array<Cx, 2> t{s.t1, s.t2};
  std::array<Mat2, 2> at;
  for (int i = 0; i < 2; ++i) {
    const Cx pq = s.p[i] * s.q[i], T = th.tht(i);
    at[i] = {T + pq, -s.q[i] / t[i], t[i] * s.p[i] * (T + pq), -pq};
  }
  return {a0, a1, at[0], at[1]};
}

Cx elem_a(const PGState& s) {
  const auto& th = s.params;
  const Cx sp = s.p[0] * s.q[0] + s.p[1] * s.q[1];
  return (sp - th.thinf2) * (sp - th.th1 - th.thinf2) - s.t1 * s.p[0] * (th.tht1 + s.p[0] * s.q[0]) -
         s.t2 * s.p[1] * (th.tht2 + s.p[1] * s.q[1]);
}

std::array<Mat2, 4> s_matrices(const PGState& s, Cx u) {
  const auto& th = s.params;
  const Cx gap = th.thinf1 - th.thinf2;
  if (std::abs(gap) < 1e-10) fail(ErrorKind::ResonantInfinity, "thinf1 = thinf2: the gauge P is undefined");
  if (!(std::abs(u) > 0.0)) fail(ErrorKind::ZeroGauge, "gauge u is zero");
  const Mat2 g{1.0, 0.0, elem_a(s) / gap, u};
  const Mat2 gi = g.inverse();
  auto a = ahat_matrices(s);
  for (auto& m : a) m = gi * m * g;
  return a;
}

schlesinger::ThetaGO go_theta(const ThetaPG& th) {
  return schlesinger::ThetaGO::from_exponents({th.tht1, th.tht2, th.th1, th.th0}, th.thinf2 - th.thinf1);
}

schlesinger::SchlesingerState to_schlesinger(const PGState& s, Cx u) {
  const auto S = s_matrices(s, u);
  schlesinger::SchlesingerState out;
  out.t1 = s.t1;
  out.t2 = s.t2;
  out.norm = schlesinger::Norm::Q;
  out.A = {S[2], S[3], S[1], S[0]};
  out.theta = go_theta(s.params);
  return out;
}

double linearization_residual(const PGState& s, Cx u, double h) {
  const FDScheme fd{4, h, true, false};
  const auto sch = to_schlesinger(s, u);
  double worst = 0.0;
  for (int i = 1; i <= 2; ++i) {
    const auto expect = schlesinger::flow_rhs(sch.times(), sch.A, i - 1);
    for (int j = 0; j < 4; ++j) {
      const Mat2 d = fd_offset_derivative(
          [&](double delta) {
            const PGHop moved = pg_hop(s, u, i, delta);
            return to_schlesinger(moved.state, moved.u).A[j];
          },
          h, fd);
      worst = std::max(worst, max_abs_diff(d, expect[j]) / std::max(1.0, expect[j].max_abs()));
    }
  }
  return worst;
}

double spectrum_error(const PGState& s, Cx u) {
  const auto S = s_matrices(s, u);
  const auto& th = s.params;
  const std::array<Cx, 4> exps{th.th0, th.th1, th.tht1, th.tht2};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto ev = S[i].eigenvalues();
    const double keep = std::max(std::abs(ev[0]), std::abs(ev[1] - exps[i]));
    const double swap = std::max(std::abs(ev[1]), std::abs(ev[0] - exps[i]));
    worst = std::max(worst, std::min(keep, swap));
  }
  return worst;
}

std::array<Cx, 2> bridge_q_from_lambda(Cx l1, Cx l2, Cx t1, Cx t2) {
  if (std::abs(t1 - t2) < 1e-12) fail(ErrorKind::TimeCollision, "t1 = t2");
  if (std::abs(l1 - 1.0) < 1e-12 || std::abs(l2 - 1.0) < 1e-12) fail(ErrorKind::PoleEvaluation, "lambda = 1");
  const Cx den = (t1 - t2) * (l1 - 1.0) * (l2 - 1.0);
  return {(1.0 - t2) * (l1 - t1) * (l2 - t1) / den, -(1.0 - t1) * (l1 - t2) * (l2 - t2) / den};
}

std::array<Cx, 2> bridge_lambda_from_q(Cx q1, Cx q2, Cx t1, Cx t2) {
  const Cx w = 1.0 - q1 - q2;
  if (std::abs(w) < 1e-12) fail(ErrorKind::ReductionLocus, "q1 + q2 = 1: the bridge is undefined");
  const Cx e1 = (t1 + t2 - (1.0 + t2) * q1 - (1.0 + t1) * q2) / w;
  const Cx e2 = (t1 * t2 - t2 * q1 - t1 * q2) / w;
  auto r = quad_roots(1.0, -e1, e2);
  if (r[1].real() < r[0].real() || (r[1].real() == r[0].real() && r[1].imag() < r[0].imag())) std::swap(r[0], r[1]);
  return r;
}

std::array<Cx, 2> mu_p_relations(const PGState& s, const okamoto::GOState& g) {
  const auto& th = s.params;
  const Cx l1 = g.lambda[0], l2 = g.lambda[1], m1 = g.mu[0], m2 = g.mu[1];
  if (std::abs(s.q[0]) < 1e-300 || std::abs(s.q[1]) < 1e-300) fail(ErrorKind::PoleEvaluation, "q_i = 0");
  if (std::abs(l1 - l2) < 1e-12) fail(ErrorKind::PoleEvaluation, "lambda1 = lambda2");
  if (std::abs(l1 * l2) < 1e-300) fail(ErrorKind::PoleEvaluation, "lambda_k = 0");
  const Cx t1 = s.t1, t2 = s.t2;
  const Cx sig = th.tht1 + th.tht2 + th.th1 + th.th0 + th.thinf2;
  const Cx pref = (l1 - 1.0) * (l2 - 1.0) / ((t1 - 1.0) * (t2 - 1.0));
  const Cx r1 = s.p[0] + th.tht1 / s.q[0] -
                pref * (((l1 - 1.0) * (l1 - t2) * m1 - (l2 - 1.0) * (l2 - t2) * m2) / (l1 - l2) - sig +
                        th.th0 * t2 / (l1 * l2));
  const Cx r2 = s.p[1] + th.tht2 / s.q[1] -
                pref * (((l1 - 1.0) * (l1 - t1) * m1 - (l2 - 1.0) * (l2 - t1) * m2) / (l1 - l2) - sig +
                        th.th0 * t1 / (l1 * l2));
  return {r1, r2};
}

Cx pvi_omega(Cx t1, Cx t2) {
  if (std::abs(t2 - t1) < 1e-12) fail(ErrorKind::TimeCollision, "t1 = t2");
  return t1 * (t2 - 1.0) / (t2 - t1);
}

Cx pvi_t1_from_omega(Cx omega, Cx t2) { return omega * t2 / (omega + t2 - 1.0); }

PVIState pvi_reduce(const PGState& s, double tol) {
  const auto& th = s.params;
  if (std::abs(s.q[0] + s.q[1] - 1.0) > tol) fail(ErrorKind::NotOnReduction, "q1 + q2 != 1");
  if (std::abs(th.thinf1 - th.thinf2 - 1.0) > tol) fail(ErrorKind::NotOnReduction, "thinf1 != thinf2 + 1");
  return {pvi_omega(s.t1, s.t2), s.q[0], s.p[0] - s.p[1], th};
}

Cx pvi_hamiltonian(const PVIState& v) {
  const auto& th = v.params;
  const Cx w = v.omega, Q = v.Q, P = v.P, c = th.th1 + 2.0 * th.thinf2;
  return (P * P * Q * (Q - 1.0) * (Q - w) - P * (c * Q * (Q - 1.0) + w * th.tht1 * (Q - 1.0) + (w - 1.0) * th.tht2 * Q) +
          th.thinf2 * (th.thinf2 + th.th1) * Q) /
         (w * (w - 1.0));
}

std::array<Cx, 2> pvi_partials(const PVIState& v) {
  const auto& th = v.params;
  const Cx w = v.omega, Q = v.Q, P = v.P, c = th.th1 + 2.0 * th.thinf2;
  const Cx n = w * (w - 1.0);
  const Cx hq = (P * P * (3.0 * Q * Q - 2.0 * (1.0 + w) * Q + w) - P * (c * (2.0 * Q - 1.0) + w * th.tht1 + (w - 1.0) * th.tht2) +
                 th.thinf2 * (th.thinf2 + th.th1)) /
                n;
  const Cx hp = (2.0 * P * Q * (Q - 1.0) * (Q - w) - (c * Q * (Q - 1.0) + w * th.tht1 * (Q - 1.0) + (w - 1.0) * th.tht2 * Q)) / n;
  return {hq, hp};
}

namespace {

/// Field in omega: t2 fixed, t1 = t1(omega), only the t1 flow acts.
Field omega_field(const ThetaPG& th, Cx t2) {
  return [th, t2](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> y, std::span<Cx> dy) {
    const Cx w = p[0];
    const Cx t1 = pvi_t1_from_omega(w, t2);
    const Cx den = w + t2 - 1.0;
    const Cx dt1 = t2 * (t2 - 1.0) / (den * den);
    const PGRhs r = pg_rhs_explicit({t1, t2, {y[0], y[1]}, {y[2], y[3]}, th});
    for (int k = 0; k < 4; ++k) dy[k] = d[0] * dt1 * r.d_t1[k];
  };
}

}  // namespace

PGTrajectory integrate_pvi_segment(const PGState& s0, Cx omega_end, const OdeOptions& options) {
  const PVIState v0 = pvi_reduce(s0);
  const Cx t2 = s0.t2;
  PathPlan path = PathPlan::line({v0.omega}, {omega_end});
  path.singular = {Singularity::point(0.0, "omega = 0"), Singularity::point(1.0, "omega = 1"),
                   Singularity::point(1.0 - t2, "t1 at infinity"), Singularity::point(t2, "t1 = t2")};
  const auto traj = ode_integrate(omega_field(s0.params, t2), {s0.q[0], s0.q[1], s0.p[0], s0.p[1]}, path, options);
  PGTrajectory out;
  out.rejected_steps = traj.rejected_steps;
  auto state_of = [&](Cx w, const CVec& y) {
    return PGState{pvi_t1_from_omega(w, t2), t2, {y[0], y[1]}, {y[2], y[3]}, s0.params};
  };
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out.sigma.push_back(traj.sigma[k]);
    out.states.push_back(state_of(traj.points[k][0], traj.states[k]));
    out.u.push_back(1.0);
  }
  for (std::size_t k = 0; k < traj.sample_states.size(); ++k) {
    out.sample_sigma.push_back(traj.sample_sigma[k]);
    out.samples.push_back(state_of(path.point(traj.sample_sigma[k])[0], traj.sample_states[k]));
    out.sample_u.push_back(1.0);
  }
  return out;
}

double pvi_hamilton_residual(const PGState& s, double h, const FDScheme& fd) {
  const PVIState v = pvi_reduce(s, 1e-8);
  const Field f = omega_field(s.params, s.t2);
  const CVec y0{s.q[0], s.q[1], s.p[0], s.p[1]};
  auto moved = [&](double d) {
    return rk_fixed(f, y0, CVec{v.omega}, CVec{v.omega + d}, 4);
  };
  const Cx dQ = fd_offset_derivative([&](double d) { return moved(d)[0]; }, h, fd);
  const Cx dP = fd_offset_derivative(
      [&](double d) {
        const CVec y = moved(d);
        return y[2] - y[3];
      },
      h, fd);
  const auto part = pvi_partials(v);
  const double r1 = std::abs(dQ - part[1]) / std::max(std::abs(part[1]), 1e-300);
  const double r2 = std::abs(dP + part[0]) / std::max(std::abs(part[0]), 1e-300);
  return std::max(r1, r2);
}

PGState find_fixed_point(const ThetaPG& th, Cx t1, Cx t2, std::uint64_t seed) {
  check_pg_times(t1, t2);
  // A stationary solution needs both flows to vanish at nearby times too, so
  // the residual stacks all eight right-hand sides at three time points and
  // Gauss-Newton runs on the normal equations.
  constexpr std::array<Cx, 3> kShifts{Cx(0.0), Cx(0.1, 0.05), Cx(-0.07, 0.11)};
  constexpr std::size_t kRows = 8 * kShifts.size();
  auto residual = [&](const std::array<Cx, 4>& x) {
    std::array<Cx, kRows> r;
    std::size_t k = 0;
    for (const Cx dt : kShifts) {
      const PGRhs all = pg_rhs_explicit({t1 + dt, t2 - dt, {x[0], x[1]}, {x[2], x[3]}, th});
      for (int c = 0; c < 4; ++c) {
        r[k++] = all.d_t1[c];
        r[k++] = all.d_t2[c];
      }
    }
    return r;
  };
  Rng rng(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::array<Cx, 4> x;
    for (auto& v : x) v = rng.complex_normal(0.3);
    for (int it = 0; it < 80; ++it) {
      const auto f = residual(x);
      double norm = 0.0;
      for (const Cx v : f) norm = std::max(norm, std::abs(v));
      if (!std::isfinite(norm)) break;
      if (norm < 1e-13) return {t1, t2, {x[0], x[1]}, {x[2], x[3]}, th};
      std::array<std::array<Cx, 4>, kRows> jac;
      const double h = 1e-7;
      for (int c = 0; c < 4; ++c) {
        auto xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const auto fp = residual(xp), fm = residual(xm);
        for (std::size_t r = 0; r < kRows; ++r) jac[r][c] = (fp[r] - fm[r]) / (2.0 * h);
      }
      std::array<std::array<Cx, 4>, 4> normal{};
      std::array<Cx, 4> rhs{};
      for (std::size_t r = 0; r < kRows; ++r) {
        for (int a = 0; a < 4; ++a) {
          rhs[a] += std::conj(jac[r][a]) * f[r];
          for (int b = 0; b < 4; ++b) normal[a][b] += std::conj(jac[r][a]) * jac[r][b];
        }
      }
      std::array<Cx, 4> step;
      try {
        step = solve(normal, rhs);
      } catch (const NumericError&) {
        break;
      }
      for (int c = 0; c < 4; ++c) x[c] -= step[c];
    }
  }
  fail(ErrorKind::DegenerateJacobian, "no stationary state of both flows found");
}

}  // namespace garnier::polynomial
