#include "doctest.h"
#include "garnier/error.hpp"
#include "garnier/polynomial.hpp"
#include "garnier/rng.hpp"

using namespace garnier;
using namespace garnier::polynomial;

namespace {

const Cx kT1(2.2, 0.6), kT2(-1.1, 0.9);

ThetaPG sample_theta(Rng& rng) {
  return ThetaPG::with_fuchs(Cx(0.3, 0.1) + rng.complex_normal(0.1), Cx(0.45, -0.2) + rng.complex_normal(0.1),
                             Cx(0.27, 0.05) + rng.complex_normal(0.1), Cx(0.61, 0.13) + rng.complex_normal(0.1),
                             Cx(-0.8, 0.3) + rng.complex_normal(0.1));
}

PGState sample_state(Rng& rng) {
  PGState s;
  s.t1 = kT1 + rng.complex_normal(0.2);
  s.t2 = kT2 + rng.complex_normal(0.2);
  s.q = {Cx(0.3, 0.4) + rng.complex_normal(0.3), Cx(-0.2, 0.5) + rng.complex_normal(0.3)};
  s.p = {rng.complex_normal(0.5), rng.complex_normal(0.5)};
  s.params = sample_theta(rng);
  return s;
}

double rel(Cx a, Cx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double mat_rel(const Mat2& a, const Mat2& b) { return max_abs_diff(a, b) / std::max(1.0, b.max_abs()); }

PGState swapped(const PGState& s) {
  PGState r = s;
  std::swap(r.t1, r.t2);
  std::swap(r.q[0], r.q[1]);
  std::swap(r.p[0], r.p[1]);
  std::swap(r.params.tht1, r.params.tht2);
  return r;
}

/// Hamiltonian for index 1 written term by term in a different grouping.
Cx h1_by_terms(const PGState& s) {
  const auto& th = s.params;
  const Cx t1 = s.t1, t2 = s.t2, q1 = s.q[0], q2 = s.q[1], p1 = s.p[0], p2 = s.p[1];
  const Cx a = th.th0 + th.tht2 + 1.0;
  const Cx b = 2.0 * th.thinf2 + th.th1 + th.th0 + th.tht1 + th.tht2 + 1.0;
  Cx h = q1 * (q1 - 1.0) * (q1 - t1) * p1 * p1;
  h += a * q1 * (q1 - 1.0) * p1;
  h -= b * q1 * (q1 - t1) * p1;
  h += th.tht1 * (q1 - 1.0) * (q1 - t1) * p1;
  h += th.thinf2 * (th.thinf2 + th.th1) * q1;
  h += 2.0 * q1 * q1 * q2 * p1 * p2 + q1 * q2 * q2 * p2 * p2 - (th.th1 + 2.0 * th.thinf2) * q1 * q2 * p2;
  const Cx D = t1 - t2;
  h -= t1 * (t1 - 1.0) * (p1 * q1 + th.tht1) * p1 * q2 / D;
  h += t1 * (t2 - 1.0) * (2.0 * p1 * q1 + th.tht1) * p2 * q2 / D;
  h -= t2 * (t1 - 1.0) * q1 * (p2 * p2 * q2 + th.tht2 * (p2 - p1)) / D;
  return h / (t1 * (t1 - 1.0));
}

}  // namespace

TEST_CASE("Hamiltonian special values") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    PGState s = sample_state(rng);
    const auto& th = s.params;
    s.p = {0.0, 0.0};
    for (int i = 1; i <= 2; ++i) {
      const Cx t = i == 1 ? s.t1 : s.t2;
      const Cx expect = th.thinf2 * (th.thinf2 + th.th1) * s.q[i - 1] / (t * (t - 1.0));
      CHECK(rel(hamiltonian_HGar(i, s), expect) < 1e-13);
    }
    s.q = {0.0, 0.0};
    s.p = {rng.complex_normal(1.0), rng.complex_normal(1.0)};
    // Only the theta^{t_i} (q_i - 1)(q_i - t_i) p_i term survives.
    CHECK(rel(hamiltonian_HGar(1, s), th.tht1 * s.p[0] / (s.t1 - 1.0)) < 1e-13);
    CHECK(rel(hamiltonian_HGar(2, s), th.tht2 * s.p[1] / (s.t2 - 1.0)) < 1e-13);
  }
}

TEST_CASE("Hamiltonian agrees with a term-by-term evaluation and swaps indices") {
  Rng rng(12);
  for (int k = 0; k < 50; ++k) {
    const PGState s = sample_state(rng);
    CHECK(rel(hamiltonian_HGar(1, s), h1_by_terms(s)) < 1e-12);
    CHECK(rel(hamiltonian_HGar(2, s), hamiltonian_HGar(1, swapped(s))) < 1e-13);
  }
  PGState bad = sample_state(rng);
  bad.t2 = bad.t1;
  CHECK_THROWS_AS(hamiltonian_HGar(1, bad), NumericError);
  CHECK_THROWS_AS(hamiltonian_HGar(3, sample_state(rng)), NumericError);
}

TEST_CASE("explicit right-hand sides: overlap, truncation, index swap") {
  Rng rng(13);
  for (int k = 0; k < 50; ++k) {
    const PGState s = sample_state(rng);
    const auto e = explicit_terms(s);
    CHECK(rel(e.opo, e.tqo) < 1e-13);
    const auto es = explicit_terms(swapped(s));
    CHECK(rel(e.tqt, es.oqo) < 1e-12);
    CHECK(rel(e.tpt, es.oppo) < 1e-12);
    CHECK(rel(e.tpo, es.opt) < 1e-12);

    PGState z = s;
    z.p = {0.0, 0.0};
    const auto& th = s.params;
    const Cx c = th.th1 + 2.0 * th.thinf2, D = s.t1 - s.t2;
    const Cx q1 = s.q[0], q2 = s.q[1];
    const Cx expect = -c * q1 * q1 - (1.0 + th.th0 + th.tht1 + th.tht2) * q1 +
                      (1.0 + c + th.th0 + th.tht2) * s.t1 * q1 + s.t1 * th.tht1 +
                      (s.t1 - 1.0) / D * (s.t2 * th.tht2 * q1 - s.t1 * th.tht1 * q2);
    CHECK(rel(explicit_terms(z).oqo, expect) < 1e-13);
  }
}

TEST_CASE("explicit right-hand sides equal Hamilton's equations on 200 states") {
  Rng rng(14);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const PGState s = sample_state(rng);
    const auto a = pg_rhs_explicit(s);
    const auto b = pg_rhs_from_hamiltonian(s);
    for (int c = 0; c < 4; ++c) {
      worst = std::max(worst, std::abs(a.d_t1[c] - b.d_t1[c]) / std::max(1.0, std::abs(a.d_t1[c])));
      worst = std::max(worst, std::abs(a.d_t2[c] - b.d_t2[c]) / std::max(1.0, std::abs(a.d_t2[c])));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("Ahat matrices: eigenvalues, rank, sum") {
  Rng rng(15);
  for (int k = 0; k < 50; ++k) {
    const PGState s = sample_state(rng);
    const auto& th = s.params;
    const auto a = ahat_matrices(s);
    const std::array<Cx, 4> exps{th.th0, th.th1, th.tht1, th.tht2};
    for (int i = 0; i < 4; ++i) {
      const auto ev = a[i].eigenvalues();
      const bool direct = std::abs(ev[0]) < 1e-10 && std::abs(ev[1] - exps[i]) < 1e-10;
      const bool flipped = std::abs(ev[1]) < 1e-10 && std::abs(ev[0] - exps[i]) < 1e-10;
      CHECK((direct || flipped));
    }
    CHECK(std::abs(a[1].det()) < 1e-12 * std::max(1.0, a[1].max_abs() * a[1].max_abs()));
    const Mat2 minus_sum = -(a[0] + a[1] + a[2] + a[3]);
    CHECK(std::abs(minus_sum.a11 - th.thinf1) < 1e-12);
    CHECK(std::abs(minus_sum.a22 - th.thinf2) < 1e-12);
    CHECK(std::abs(minus_sum.a12) < 1e-12);
    CHECK(rel(elem_a(s), minus_sum.a21) < 1e-12);
  }
  PGState z = sample_state(rng);
  z.q = {0.0, 0.0};
  z.p = {0.0, 0.0};
  const auto a = ahat_matrices(z);
  CHECK(max_abs_diff(a[2], Mat2{z.params.tht1, 0.0, 0.0, 0.0}) < 1e-15);
  const auto& th = z.params;
  CHECK(rel(elem_a(z), th.thinf2 * (th.th1 + th.thinf2)) < 1e-14);
}

TEST_CASE("u log-derivative: special case and closedness along the flow") {
  Rng rng(16);
  PGState z = sample_state(rng);
  z.q = {0.0, 0.0};
  const auto d = u_logderiv(z);
  CHECK(rel(d[0], z.params.tht1 / (z.t1 - 1.0)) < 1e-14);
  CHECK(rel(d[1], z.params.tht2 / (z.t2 - 1.0)) < 1e-14);

  const FDScheme fd{4, 1e-3, true, false};
  for (int k = 0; k < 5; ++k) {
    const PGState s = sample_state(rng);
    const Cx d21 = fd_offset_derivative([&](double h) { return u_logderiv(pg_hop(s, 1.0, 2, h).state)[0]; }, 1e-3, fd);
    const Cx d12 = fd_offset_derivative([&](double h) { return u_logderiv(pg_hop(s, 1.0, 1, h).state)[1]; }, 1e-3, fd);
    CHECK(rel(d21, d12) < 1e-6);
  }
}

TEST_CASE("gauge to Schlesinger form") {
  Rng rng(17);
  for (int k = 0; k < 50; ++k) {
    const PGState s = sample_state(rng);
    const Cx u = rng.complex_normal(1.0) + 0.5;
    const auto S = s_matrices(s, u);
    const auto& th = s.params;
    const Mat2 minus_sum = -(S[0] + S[1] + S[2] + S[3]);
    CHECK(std::abs(minus_sum.a12) < 1e-12);
    CHECK(std::abs(minus_sum.a21) < 1e-12 * std::max(1.0, std::abs(elem_a(s))));
    CHECK(std::abs(minus_sum.a11 - th.thinf1) < 1e-12);
    CHECK(std::abs(minus_sum.a22 - th.thinf2) < 1e-12);
    const std::array<Cx, 4> exps{th.th0, th.th1, th.tht1, th.tht2};
    for (int i = 0; i < 4; ++i) {
      auto ev = S[i].eigenvalues();
      if (std::abs(ev[0]) > std::abs(ev[1])) std::swap(ev[0], ev[1]);
      CHECK(std::abs(ev[0]) < 1e-10);
      CHECK(std::abs(ev[1] - exps[i]) < 1e-10);
    }

    const std::array<Cx, 4> poles{0.0, 1.0, s.t1, s.t2};
    const Cx q1 = s.q[0], q2 = s.q[1], t1 = s.t1, t2 = s.t2;
    for (const Cx x : {Cx(0.37, -1.2), Cx(-2.1, 0.4), Cx(3.3, 2.7)}) {
      Cx e12 = 0.0;
      for (int i = 0; i < 4; ++i) e12 += S[i].a12 / (x - poles[i]);
      const Cx numer = e12 * x * (x - 1.0) * (x - t1) * (x - t2) / u;
      const Cx expect = (1.0 - q1 - q2) * x * x + (-t1 - t2 + q2 * (1.0 + t1) + q1 * (1.0 + t2)) * x + t1 * t2 -
                        q1 * t2 - q2 * t1;
      CHECK(rel(numer, expect) < 1e-11);
    }

    const auto sch = to_schlesinger(s, u);
    CHECK(sch.norm == schlesinger::Norm::Q);
    CHECK(max_abs_diff(sch.A[0], S[2]) == 0.0);
    CHECK(max_abs_diff(sch.A[3], S[0]) == 0.0);
  }
  PGState res = sample_state(rng);
  res.params.thinf1 = res.params.thinf2;
  CHECK_THROWS_AS(s_matrices(res, 1.0), NumericError);
  CHECK_THROWS_AS(s_matrices(sample_state(rng), 0.0), NumericError);
}

TEST_CASE("bridges") {
  Rng rng(18);
  const Cx t1 = kT1, t2 = kT2;
  auto q = bridge_q_from_lambda(t1, Cx(0.3, 0.2), t1, t2);
  CHECK(std::abs(q[0]) < 1e-15);
  q = bridge_q_from_lambda(Cx(0.3, 0.2), t2, t1, t2);
  CHECK(std::abs(q[1]) < 1e-15);
  auto l = bridge_lambda_from_q(0.0, 0.0, t1, t2);
  CHECK(((std::abs(l[0] - t1) < 1e-12 && std::abs(l[1] - t2) < 1e-12) ||
         (std::abs(l[0] - t2) < 1e-12 && std::abs(l[1] - t1) < 1e-12)));
  CHECK_THROWS_AS(bridge_lambda_from_q(0.4, 0.6, t1, t2), NumericError);
  CHECK_THROWS_AS(bridge_q_from_lambda(1.0, 0.3, t1, t2), NumericError);

  for (int k = 0; k < 100; ++k) {
    const Cx l1 = rng.complex_normal(1.5), l2 = rng.complex_normal(1.5);
    const auto qq = bridge_q_from_lambda(l1, l2, t1, t2);
    const auto qs = bridge_q_from_lambda(l2, l1, t1, t2);
    CHECK(std::abs(qq[0] - qs[0]) < 1e-12 * std::max(1.0, std::abs(qq[0])));
    const auto back = bridge_lambda_from_q(qq[0], qq[1], t1, t2);
    const bool same = std::abs(back[0] - l1) + std::abs(back[1] - l2) < 1e-9;
    const bool crossed = std::abs(back[0] - l2) + std::abs(back[1] - l1) < 1e-9;
    CHECK((same || crossed));
    const auto sym = bridge_lambda_from_q(qq[1], qq[0], t2, t1);
    CHECK(std::abs(sym[0] - back[0]) + std::abs(sym[1] - back[1]) < 1e-9);
  }
}

TEST_CASE("bridge coherence with the GO extraction and the mu-p relations") {
  Rng rng(19);
  for (int k = 0; k < 30; ++k) {
    const PGState s = sample_state(rng);
    const Cx u = Cx(0.8, 0.3) + rng.complex_normal(0.3);
    const auto sch = to_schlesinger(s, u);
    const auto g = okamoto::extract_go(sch);
    const auto l = bridge_lambda_from_q(s.q[0], s.q[1], s.t1, s.t2);
    CHECK(std::abs(l[0] - g.lambda[0]) < 1e-8 * std::max(1.0, std::abs(l[0])));
    CHECK(std::abs(l[1] - g.lambda[1]) < 1e-8 * std::max(1.0, std::abs(l[1])));
    const auto r = mu_p_relations(s, g);
    CHECK(std::abs(r[0]) < 1e-7 * std::max(1.0, std::abs(s.p[0])));
    CHECK(std::abs(r[1]) < 1e-7 * std::max(1.0, std::abs(s.p[1])));

    okamoto::GOState moved = g;
    moved.mu[0] += 1.0;
    const auto rp = mu_p_relations(s, moved);
    CHECK(std::abs(rp[0]) > 1e-6);
  }
}

TEST_CASE("integrate_pg: retrace, commutation, nonvanishing gauge") {
  Rng rng(20);
  const PGState s = sample_state(rng);
  const Cx a1 = s.t1, a2 = s.t2;
  const Cx b1 = a1 + Cx(0.3, 0.2), b2 = a2 + Cx(-0.2, 0.25);
  const auto there = integrate_pg(s, schlesinger::time_path({{a1, a2}, {b1, b2}, {a1, a2}}));
  const auto& end = there.final_state();
  CHECK(std::abs(end.q[0] - s.q[0]) + std::abs(end.q[1] - s.q[1]) < 1e-8);
  CHECK(std::abs(end.p[0] - s.p[0]) + std::abs(end.p[1] - s.p[1]) < 1e-8);
  CHECK(std::abs(there.u.back() - 1.0) < 1e-8);
  for (const Cx u : there.u) CHECK(std::abs(u) > 1e-6);

  const auto one = integrate_pg(s, schlesinger::time_path({{a1, a2}, {b1, a2}, {b1, b2}})).final_state();
  const auto two = integrate_pg(s, schlesinger::time_path({{a1, a2}, {a1, b2}, {b1, b2}})).final_state();
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(one.q[i] - two.q[i]) < 1e-7);
    CHECK(std::abs(one.p[i] - two.p[i]) < 1e-7);
  }
}

TEST_CASE("fixed point stays constant") {
  Rng rng(21);
  const ThetaPG th = ThetaPG::with_fuchs(Cx(0.3, 0.1), Cx(0.45, -0.2), 0.0, 0.0, Cx(-0.75, 0.1));
  REQUIRE(std::abs(th.thinf2) < 1e-15);
  const auto f = find_fixed_point(th, kT1, kT2, 5);
  const auto r = pg_rhs_explicit(f);
  for (int c = 0; c < 4; ++c) {
    CHECK(std::abs(r.d_t1[c]) < 1e-12);
    CHECK(std::abs(r.d_t2[c]) < 1e-12);
  }
  const auto traj = integrate_pg(f, schlesinger::time_path({{kT1, kT2}, {kT1 + 0.3, kT2 + Cx(0.1, 0.2)}}));
  const auto& e = traj.final_state();
  CHECK(std::abs(e.q[0] - f.q[0]) + std::abs(e.q[1] - f.q[1]) + std::abs(e.p[0] - f.p[0]) +
            std::abs(e.p[1] - f.p[1]) <
        1e-10);
}

TEST_CASE("linearization: S follows the Schlesinger flow") {
  Rng rng(22);
  const FDScheme fd{4, 1e-3, true, false};
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    const PGState s = sample_state(rng);
    const Cx u = Cx(0.9, -0.2);
    const auto sch = to_schlesinger(s, u);
    for (int i = 1; i <= 2; ++i) {
      const auto expect = schlesinger::flow_rhs(sch.times(), sch.A, i - 1);
      for (int j = 0; j < 4; ++j) {
        const Mat2 d = fd_offset_derivative(
            [&](double h) {
              const auto hop = pg_hop(s, u, i, h);
              return to_schlesinger(hop.state, hop.u).A[j];
            },
            1e-3, fd);
        worst = std::max(worst, mat_rel(d, expect[j]));
      }
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("PVI reduction") {
  Rng rng(23);
  ThetaPG th = sample_theta(rng);
  // Fix thinf1 = thinf2 + 1 while keeping the Fuchs relation.
  const Cx rest = th.th0 + th.th1 + th.tht1 + th.tht2;
  th.thinf2 = -(rest + 1.0) / 2.0;
  th.thinf1 = th.thinf2 + 1.0;
  REQUIRE(std::abs(th.fuchs_defect()) < 1e-15);

  PGState s{kT1, kT2, {Cx(0.3, 0.4), Cx(0.7, -0.4)}, {Cx(0.2, -0.1), Cx(-0.3, 0.2)}, th};
  const auto v = pvi_reduce(s);
  CHECK(rel(v.omega, kT1 * (kT2 - 1.0) / (kT2 - kT1)) < 1e-15);
  CHECK(rel(pvi_t1_from_omega(v.omega, kT2), kT1) < 1e-14);
  PVIState zero = v;
  zero.P = 0.0;
  CHECK(rel(pvi_hamiltonian(zero) * v.omega * (v.omega - 1.0), th.thinf2 * (th.thinf2 + th.th1) * v.Q) < 1e-13);

  const auto part = pvi_partials(v);
  const FDScheme fd;
  const Cx hq = fd_derivative([&](Cx q) { PVIState w = v; w.Q = q; return pvi_hamiltonian(w); }, v.Q, fd);
  const Cx hp = fd_derivative([&](Cx p) { PVIState w = v; w.P = p; return pvi_hamiltonian(w); }, v.P, fd);
  CHECK(rel(part[0], hq) < 1e-9);
  CHECK(rel(part[1], hp) < 1e-9);

  CHECK(pvi_hamilton_residual(s) < 1e-6);

  const auto traj = integrate_pvi_segment(s, v.omega + Cx(0.2, 0.15));
  double drift = 0.0;
  for (const auto& st : traj.states) drift = std::max(drift, std::abs(st.q[0] + st.q[1] - 1.0));
  CHECK(drift < 1e-9);
  CHECK(pvi_hamilton_residual(traj.final_state()) < 1e-6);

  PGState off = s;
  off.q[1] += 0.1;
  CHECK_THROWS_AS(pvi_reduce(off), NumericError);
  PGState wrong = s;
  wrong.params = sample_theta(rng);
  CHECK_THROWS_AS(pvi_reduce(wrong), NumericError);
}
