#include "doctest.h"
#include "garnier/error.hpp"
#include "garnier/okamoto.hpp"
#include "garnier/rng.hpp"

using namespace garnier;
using namespace garnier::okamoto;
using schlesinger::Norm;

namespace {

const std::array<Cx, 4> kTheta{Cx(0.3, 0.1), Cx(0.45, -0.2), Cx(0.27, 0.05), Cx(0.61, 0.13)};
const Cx kT1(2.2, 0.6), kT2(-1.1, 0.9);

SchlesingerState seeded_q(std::uint64_t seed) {
  return schlesinger::shift_normalization(schlesinger::random_b_state(kTheta, kT1, kT2, seed).state,
                                          schlesinger::ShiftDir::BtoQ);
}

/// Residues whose q12 numerator is X (x - r1)(x - r2).
SchlesingerState with_numerator(Cx X, Cx r1, Cx r2) {
  SchlesingerState s;
  s.t1 = kT1;
  s.t2 = kT2;
  s.norm = Norm::Q;
  s.theta = schlesinger::ThetaGO::from_exponents(kTheta, 0.5);
  const auto t = s.times();
  for (int i = 0; i < 4; ++i) {
    Cx den = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) den *= t[i] - t[j];
    s.A[i] = {Cx(0.1 * i), X * (t[i] - r1) * (t[i] - r2) / den, Cx(0.2), Cx(-0.3)};
  }
  return s;
}

GOState sample_go(Rng& rng) {
  GOState g;
  g.t1 = kT1 + rng.complex_normal(0.2);
  g.t2 = kT2 + rng.complex_normal(0.2);
  g.lambda = {Cx(0.4, -1.3) + rng.complex_normal(0.2), Cx(3.1, 1.7) + rng.complex_normal(0.2)};
  g.mu = {rng.complex_normal(0.5), rng.complex_normal(0.5)};
  g.params = schlesinger::ThetaGO::from_exponents(kTheta, Cx(0.7, -0.2));
  return g;
}

}  // namespace

TEST_CASE("extract_lambda recovers prescribed zeros") {
  const auto r = extract_lambda(with_numerator(Cx(0.7, 0.1), 2.0, 3.0));
  CHECK(std::abs(r.lambda[0] - 2.0) < 1e-12);
  CHECK(std::abs(r.lambda[1] - 3.0) < 1e-12);
  CHECK(std::abs(r.X - Cx(0.7, 0.1)) < 1e-12);
}

TEST_CASE("extract_lambda errors for conditions (iii) and (iv)") {
  try {
    extract_lambda(with_numerator(Cx(0.7, 0.1), 2.0, 2.0));
    FAIL("expected a throw");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::ConditionIVViolated);
  }
  // Numerator of degree one: X = 0.
  SchlesingerState s = with_numerator(1.0, 2.0, 3.0);
  const auto t = s.times();
  for (int i = 0; i < 4; ++i) {
    Cx den = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) den *= t[i] - t[j];
    s.A[i].a12 = (t[i] - 2.0) / den;
  }
  try {
    extract_lambda(s);
    FAIL("expected a throw");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::ConditionIIIViolated);
  }
}

TEST_CASE("extract_lambda: back substitution and ordering on seeded states") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto q = seeded_q(seed);
    const auto r = extract_lambda(q);
    const auto t = q.times();
    for (const Cx l : r.lambda) {
      double scale = 0.0;
      for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(q.A[i].a12 / (l - t[i])));
      CHECK(std::abs(q12_at(q, l)) < 1e-11 * scale);
    }
    const bool ordered = r.lambda[0].real() < r.lambda[1].real() ||
                         (r.lambda[0].real() == r.lambda[1].real() && r.lambda[0].imag() <= r.lambda[1].imag());
    CHECK(ordered);
    const std::array<Cx, 2> swapped{r.lambda[1], r.lambda[0]};
    const auto tracked = extract_lambda(q, &swapped);
    CHECK(tracked.lambda[0] == r.lambda[1]);
    CHECK(tracked.lambda[1] == r.lambda[0]);
  }
}

TEST_CASE("extract_mu") {
  SchlesingerState s = with_numerator(1.0, 2.0, 3.0);
  for (auto& a : s.A) a.a11 = 0.0;
  CHECK(extract_mu(s, Cx(0.5, 0.5)) == Cx(0.0));
  s.A[0].a11 = Cx(0.3, 0.4);
  CHECK(std::abs(extract_mu(s, Cx(0.5, 0.5)) - Cx(0.3, 0.4) / (Cx(0.5, 0.5) - kT1)) < 1e-16);
  const auto q = seeded_q(3);
  const Cx l(0.7, -0.4);
  const auto t = q.times();
  const Cx direct = q.A[0].a11 / (l - t[0]) + q.A[1].a11 / (l - t[1]) + q.A[2].a11 / (l - t[2]) + q.A[3].a11 / (l - t[3]);
  CHECK(std::abs(extract_mu(q, l) - direct) < 1e-15);
  CHECK_THROWS_AS(extract_mu(q, kT1), NumericError);
}

TEST_CASE("hamiltonian_K special values") {
  Rng rng(5);
  GOState g = sample_go(rng);
  g.mu = {0.0, 0.0};
  // theta_inf = sum theta - 1 makes kappa vanish.
  g.params.k_inf = g.params.sum() - 2.0;
  CHECK(std::abs(g.params.kappa()) < 1e-15);
  CHECK(std::abs(hamiltonian_K(1, g)) < 1e-15);
  CHECK(std::abs(hamiltonian_K(2, g)) < 1e-15);
  g = sample_go(rng);
  g.mu = {0.0, 0.0};
  const Cx kappa = g.params.kappa();
  const auto& l = g.lambda;
  const Cx M1 = -(l[0] - g.t1) * (l[1] - g.t1) / ((g.t1 - g.t2) * (g.t1 - 1.0) * g.t1);
  Cx sum = 0.0;
  for (int k = 0; k < 2; ++k)
    sum += (l[k] - g.t2) * (l[k] - 1.0) * l[k] / (l[k] - l[1 - k]) * kappa / (l[k] * (l[k] - 1.0));
  CHECK(std::abs(hamiltonian_K(1, g) - M1 * sum) < 1e-14 * std::abs(M1 * sum));
}

TEST_CASE("hamiltonian_K: index symmetry") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const GOState g = sample_go(rng);
    GOState s = g;
    std::swap(s.t1, s.t2);
    std::swap(s.params.theta[0], s.params.theta[1]);
    CHECK(std::abs(hamiltonian_K(2, g) - hamiltonian_K(1, s)) < 1e-13 * (1.0 + std::abs(hamiltonian_K(2, g))));
  }
}

TEST_CASE("hamiltonian_K errors") {
  Rng rng(1);
  GOState g = sample_go(rng);
  g.lambda[1] = g.lambda[0];
  CHECK_THROWS_AS(hamiltonian_K(1, g), NumericError);
  g = sample_go(rng);
  g.t1 = 1.0;
  try {
    hamiltonian_K(1, g);
    FAIL("expected a throw");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::TimeCollision);
  }
}

TEST_CASE("go_vector_field: mu-derivative equals the analytic linear coefficient") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const GOState g = sample_go(rng);
    const GOField f = go_vector_field(g);
    const std::array<Cx, 2> T{g.t1, g.t2};
    const auto& th = g.params.theta;
    for (int j = 0; j < 2; ++j) {
      const int b = 1 - j;
      const auto& l = g.lambda;
      const Cx Mi = -(l[0] - T[j]) * (l[1] - T[j]) / ((T[j] - T[b]) * (T[j] - 1.0) * T[j]);
      for (int k = 0; k < 2; ++k) {
        const Cx lk = l[k];
        const Cx Mk = (lk - T[b]) * (lk - 1.0) * lk / (lk - l[1 - k]);
        Cx lin = th[2] / (lk - 1.0) + th[3] / lk;
        for (int n = 0; n < 2; ++n) lin += (th[n] - (n == j ? 1.0 : 0.0)) / (lk - T[n]);
        const Cx exact = Mi * Mk * (2.0 * g.mu[k] - lin);
        CHECK(std::abs(f.dlambda[j][k] - exact) < 1e-10 * (1.0 + std::abs(exact)));
      }
    }
    // Two step sizes agree for the lambda partials.
    FDScheme coarse;
    coarse.step = 1e-3;
    const GOField g2 = go_vector_field(g, coarse);
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) CHECK(std::abs(f.dmu[j][k] - g2.dmu[j][k]) < 1e-8 * (1.0 + std::abs(f.dmu[j][k])));
  }
}

TEST_CASE("GO field matches finite differences of extracted coordinates along the Schlesinger flow") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(cross_picture_mismatch(seeded_q(seed)) < 1e-6);
}

TEST_CASE("integrate_go agrees with extraction from the Schlesinger flow") {
  const auto s0 = seeded_q(2);
  const auto path = schlesinger::time_path({{kT1, kT2}, {kT1 + Cx(0.3, 0.1), kT2 + Cx(-0.1, 0.2)}});
  const auto straj = schlesinger::integrate_schlesinger(s0, path);
  const auto along = extract_along(straj.states);
  const auto gtraj = integrate_go(extract_go(s0), path);
  const auto& a = along.back();
  const auto& b = gtraj.final_state();
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(a.lambda[k] - b.lambda[k]) < 1e-6 * (1.0 + std::abs(a.lambda[k])));
    CHECK(std::abs(a.mu[k] - b.mu[k]) < 1e-6 * (1.0 + std::abs(a.mu[k])));
  }
}

TEST_CASE("integrate_go retraces and restricts to a single time") {
  const GOState g0 = extract_go(seeded_q(4));
  const Cx b = kT1 + Cx(0.3, 0.2);
  const auto loop = integrate_go(g0, schlesinger::time_path({{kT1, kT2}, {b, kT2}, {kT1, kT2}}));
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(loop.final_state().lambda[k] - g0.lambda[k]) < 1e-8);
    CHECK(std::abs(loop.final_state().mu[k] - g0.mu[k]) < 1e-8);
  }
  // The same t1 segment through the one-dimensional integrator with only the t1 field.
  Field single = [&](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> y, std::span<Cx> dy) {
    GOState g{p[0], kT2, {y[0], y[1]}, {y[2], y[3]}, g0.params};
    const GOField f = go_vector_field(g);
    for (int k = 0; k < 2; ++k) {
      dy[k] = d[0] * f.dlambda[0][k];
      dy[2 + k] = d[0] * f.dmu[0][k];
    }
  };
  const auto one = ode_integrate(single, {g0.lambda[0], g0.lambda[1], g0.mu[0], g0.mu[1]}, PathPlan::line({kT1}, {b}));
  const auto two = integrate_go(g0, schlesinger::time_path({{kT1, kT2}, {b, kT2}}));
  for (int k = 0; k < 2; ++k) CHECK(std::abs(one.final_state()[k] - two.final_state().lambda[k]) < 1e-10);
}

TEST_CASE("garx_coefficients: residues and decay") {
  Rng rng(12);
  const GOState g = sample_go(rng);
  const Cx K1 = hamiltonian_K(1, g), K2 = hamiltonian_K(2, g);
  const double eps = 1e-7;
  for (int k = 0; k < 2; ++k) {
    const Cx x = g.lambda[k] + eps;
    CHECK(std::abs(eps * garx_coefficients(g, K1, K2, x).coef_zprime - 1.0) < 1e-5);
  }
  const std::array<Cx, 4> t{g.t1, g.t2, 1.0, 0.0};
  for (int i = 0; i < 4; ++i) {
    const Cx x = t[i] + eps;
    CHECK(std::abs(eps * garx_coefficients(g, K1, K2, x).coef_zprime - (g.params.theta[i] - 1.0)) < 1e-5);
  }
  const Cx big(3e5, 1e5);
  const Cx lead = g.params.sum() - 4.0 + 2.0;
  CHECK(std::abs(big * garx_coefficients(g, K1, K2, big).coef_zprime - lead) < 1e-3);
  CHECK_THROWS_AS(garx_coefficients(g, K1, K2, g.lambda[0]), NumericError);
}

TEST_CASE("first component of the connection solves the scalar equation (matrix identity)") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto q = seeded_q(seed);
    const GOState g = extract_go(q);
    const Cx K1 = hamiltonian_K(1, g), K2 = hamiltonian_K(2, g);
    const auto t = q.times();
    for (const Cx x : {Cx(0.3, -1.2), Cx(2.5, 3.0), Cx(-0.7, -0.4)}) {
      Mat2 Q = Mat2::zero(), dQ = Mat2::zero();
      for (int i = 0; i < 4; ++i) {
        Q += q.A[i] / (x - t[i]);
        dQ -= q.A[i] / ((x - t[i]) * (x - t[i]));
      }
      // Z' = Q Z and Z'' = (Q' + Q^2) Z; the first row must satisfy the scalar equation.
      const Mat2 second = dQ + Q * Q;
      const auto c = garx_coefficients(g, K1, K2, x);
      const Cx r1 = second.a11 - c.coef_zprime * Q.a11 - c.coef_z;
      const Cx r2 = second.a12 - c.coef_zprime * Q.a12;
      const double scale = std::max({std::abs(second.a11), std::abs(c.coef_zprime * Q.a11), std::abs(c.coef_z)});
      CHECK(std::abs(r1) < 1e-10 * scale);
      CHECK(std::abs(r2) < 1e-10 * scale);
    }
  }
}
