#include "garnier/schlesinger.hpp"

#include <algorithm>
#include <sstream>

#include "garnier/error.hpp"
#include "garnier/fd.hpp"
#include "garnier/rng.hpp"

namespace garnier::schlesinger {

namespace {

std::string pair_label(int i, int j) {
  std::ostringstream os;
  os << "t" << (i + 1) << " = t" << (j + 1);
  return os.str();
}

void pack(const Residues& A, std::span<Cx> y) {
  for (int i = 0; i < 4; ++i) {
    y[4 * i + 0] = A[i].a11;
    y[4 * i + 1] = A[i].a12;
    y[4 * i + 2] = A[i].a21;
    y[4 * i + 3] = A[i].a22;
  }
}

Residues unpack(std::span<const Cx> y) {
  Residues A;
  for (int i = 0; i < 4; ++i) A[i] = {y[4 * i], y[4 * i + 1], y[4 * i + 2], y[4 * i + 3]};
  return A;
}

Residues shifted(const Residues& A, const ThetaGO& th, double sign) {
  Residues out = A;
  for (int i = 0; i < 4; ++i) {
    const Cx h = sign * 0.5 * th.theta[i];
    out[i].a11 += h;
    out[i].a22 += h;
  }
  return out;
}

/// Eigenvector of a 2x2 matrix for eigenvalue e, picking the better-conditioned formula.
std::array<Cx, 2> eigvec(const Mat2& m, Cx e) {
  const std::array<Cx, 2> v1{m.a12, e - m.a11};
  const std::array<Cx, 2> v2{e - m.a22, m.a21};
  const double n1 = std::norm(v1[0]) + std::norm(v1[1]);
  const double n2 = std::norm(v2[0]) + std::norm(v2[1]);
  return n1 >= n2 ? v1 : v2;
}

}  // namespace

void check_times(const Times& t, double tol) {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (std::abs(t[i] - t[j]) <= tol) fail(ErrorKind::TimeCollision, "coincident times " + pair_label(i, j));
    }
  }
}

Residues flow_rhs(const Times& t, const Residues& A, int i) {
  check_times(t);
  Residues d{};
  for (int j = 0; j < 4; ++j) {
    if (j == i) continue;
    const Mat2 c = commutator(A[i], A[j]) / (t[i] - t[j]);
    d[j] += c;
    d[i] -= c;
  }
  return d;
}

Rhs schlesinger_rhs(const SchlesingerState& s) {
  const Times t = s.times();
  return {flow_rhs(t, s.A, 0), flow_rhs(t, s.A, 1)};
}

Residues b_residues(const SchlesingerState& s) {
  return s.norm == Norm::B ? s.A : shifted(s.A, s.theta, -1.0);
}

SchlesingerState shift_normalization(const SchlesingerState& s, ShiftDir dir) {
  const Norm from = dir == ShiftDir::BtoQ ? Norm::B : Norm::Q;
  if (s.norm != from) {
    fail(ErrorKind::ConfigInvalid, "shift direction does not match the state's normalization");
  }
  SchlesingerState out = s;
  out.A = shifted(s.A, s.theta, dir == ShiftDir::BtoQ ? 1.0 : -1.0);
  out.norm = dir == ShiftDir::BtoQ ? Norm::Q : Norm::B;
  return out;
}

Mat2 connection_matrix(const SchlesingerState& s, Cx x, double tol) {
  const Times t = s.times();
  Mat2 a = Mat2::zero();
  for (int i = 0; i < 4; ++i) {
    if (std::abs(x - t[i]) <= tol) {
      std::ostringstream os;
      os << "connection evaluated at the pole t" << (i + 1) << " = " << t[i];
      fail(ErrorKind::PoleEvaluation, os.str());
    }
    a += s.A[i] / (x - t[i]);
  }
  return a;
}

std::array<Cx, 4> tau_logderiv_all(const Times& t, const Residues& B) {
  check_times(t);
  std::array<Cx, 4> d{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (j != i) d[i] += (B[j] * B[i]).trace() / (t[i] - t[j]);
    }
  }
  return d;
}

std::array<Cx, 2> tau_logderiv(const SchlesingerState& s) {
  if (s.norm != Norm::B) fail(ErrorKind::ConfigInvalid, "tau log-derivative needs B-normalized residues");
  const auto d = tau_logderiv_all(s.times(), s.A);
  return {d[0], d[1]};
}

std::vector<Singularity> time_singularities() {
  return {Singularity::coordinate(2, 0, 0.0, "t1 = 0"), Singularity::coordinate(2, 0, 1.0, "t1 = 1"),
          Singularity::coordinate(2, 1, 0.0, "t2 = 0"), Singularity::coordinate(2, 1, 1.0, "t2 = 1"),
          Singularity::diagonal(2, 0, 1, "t1 = t2")};
}

PathPlan time_path(const std::vector<std::array<Cx, 2>>& waypoints, double exclusion_radius) {
  PathPlan p;
  for (const auto& w : waypoints) p.waypoints.push_back({w[0], w[1]});
  p.exclusion_radius = exclusion_radius;
  p.singular = time_singularities();
  return p;
}

Trajectory integrate_schlesinger(const SchlesingerState& s0, const PathPlan& path, const OdeOptions& options) {
  if (path.dim() != 2) fail(ErrorKind::InvalidPath, "Schlesinger paths live in (t1, t2)");
  const auto& w0 = path.waypoints.front();
  if (std::abs(w0[0] - s0.t1) > 1e-14 || std::abs(w0[1] - s0.t2) > 1e-14) {
    fail(ErrorKind::InvalidPath, "path does not start at the state's times");
  }
  const ThetaGO theta = s0.theta;
  const Norm norm = s0.norm;
  Field field = [&](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> y, std::span<Cx> dy) {
    const Times t{p[0], p[1], 1.0, 0.0};
    const Residues A = unpack(y);
    const Residues r1 = flow_rhs(t, A, 0), r2 = flow_rhs(t, A, 1);
    Residues dA;
    for (int i = 0; i < 4; ++i) dA[i] = d[0] * r1[i] + d[1] * r2[i];
    pack(dA, dy);
    const Residues B = norm == Norm::B ? A : shifted(A, theta, -1.0);
    const auto tau = tau_logderiv_all(t, B);
    dy[16] = d[0] * tau[0] + d[1] * tau[1];
  };
  CVec y0(17);
  pack(s0.A, y0);
  y0[16] = 0.0;

  const auto traj = ode_integrate(field, y0, path, options);
  Trajectory out;
  out.rejected_steps = traj.rejected_steps;
  auto to_state = [&](const CVec& pt, const CVec& y) {
    SchlesingerState s = s0;
    s.t1 = pt[0];
    s.t2 = pt[1];
    s.A = unpack(y);
    return s;
  };
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out.sigma.push_back(traj.sigma[k]);
    out.states.push_back(to_state(traj.points[k], traj.states[k]));
    out.ln_tau.push_back(traj.states[k][16]);
  }
  for (std::size_t k = 0; k < traj.sample_states.size(); ++k) {
    out.sample_sigma.push_back(traj.sample_sigma[k]);
    out.samples.push_back(to_state(path.point(traj.sample_sigma[k]), traj.sample_states[k]));
    out.sample_ln_tau.push_back(traj.sample_states[k][16]);
  }
  return out;
}

double Drift::max() const {
  double m = a_inf;
  for (int i = 0; i < 4; ++i) m = std::max({m, trace[i], det[i]});
  return m;
}

Drift measure_drift(const SchlesingerState& a, const SchlesingerState& b) {
  Drift d;
  for (int i = 0; i < 4; ++i) {
    d.trace[i] = std::abs(a.A[i].trace() - b.A[i].trace());
    d.det[i] = std::abs(a.A[i].det() - b.A[i].det());
  }
  d.a_inf = max_abs_diff(a.a_inf(), b.a_inf());
  return d;
}

Generated random_b_state(const std::array<Cx, 4>& theta, Cx t1, Cx t2, std::uint64_t seed, double scale) {
  check_times({t1, t2, 1.0, 0.0});
  Rng rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Residues raw;
    bool ok = true;
    for (int i = 0; i < 4; ++i) {
      const Cx a = rng.complex_normal(scale), b = rng.complex_normal(scale);
      if (std::abs(b) < 1e-3 * scale) ok = false;
      const Cx c = (theta[i] * theta[i] / 4.0 - a * a) / b;
      raw[i] = {a, b, c, -a};
    }
    if (!ok) continue;
    const Mat2 binf = raw[0] + raw[1] + raw[2] + raw[3];
    // Eigenvalues are +-k/2 since B_inf is traceless.
    Cx k = 2.0 * std::sqrt(-binf.det());
    if (k.real() < 0.0 || (k.real() == 0.0 && k.imag() < 0.0)) k = -k;
    if (std::abs(k) < 1e-2) continue;
    const auto vp = eigvec(binf, 0.5 * k), vm = eigvec(binf, -0.5 * k);
    Mat2 c{vp[0], vm[0], vp[1], vm[1]};
    // Normalize columns so that C is well scaled.
    const double np = std::sqrt(std::norm(vp[0]) + std::norm(vp[1]));
    const double nm = std::sqrt(std::norm(vm[0]) + std::norm(vm[1]));
    c = Mat2{c.a11 / np, c.a12 / nm, c.a21 / np, c.a22 / nm};
    if (std::abs(c.det()) < 1e-2) continue;
    const Mat2 ci = c.inverse();
    Generated g;
    g.conjugation = c;
    g.state.t1 = t1;
    g.state.t2 = t2;
    g.state.norm = Norm::B;
    g.state.theta = ThetaGO::from_exponents(theta, k);
    for (int i = 0; i < 4; ++i) g.state.A[i] = ci * raw[i] * c;
    return g;
  }
  fail(ErrorKind::InfeasibleTheta, "could not draw a state with diagonalizable B_inf");
}

SchlesingerState hop(const SchlesingerState& s, int i, Cx delta, int steps) {
  Field field = [i](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> y, std::span<Cx> dy) {
    const Times t{p[0], p[1], 1.0, 0.0};
    const Residues r = flow_rhs(t, unpack(y), i);
    Residues dA;
    for (int j = 0; j < 4; ++j) dA[j] = d[i] * r[j];
    pack(dA, dy);
  };
  CVec y(16);
  pack(s.A, y);
  const CVec from{s.t1, s.t2};
  CVec to = from;
  to[i] += delta;
  SchlesingerState out = s;
  out.A = unpack(rk_fixed(field, y, from, to, steps));
  out.t1 = to[0];
  out.t2 = to[1];
  return out;
}

double tau_closedness(const SchlesingerState& s, double h) {
  FDScheme fd;
  auto component = [&](int differentiate_in, int component_of) {
    auto g = [&](double d) {
      const SchlesingerState moved = hop(s, differentiate_in, d, 4);
      SchlesingerState b = moved;
      b.A = b_residues(moved);
      b.norm = Norm::B;
      return tau_logderiv(b)[component_of];
    };
    return fd_offset_derivative(g, h, fd);
  };
  const Cx d21 = component(1, 0), d12 = component(0, 1);
  return std::abs(d21 - d12) / std::max({std::abs(d21), std::abs(d12), 1e-300});
}

}  // namespace garnier::schlesinger
