#include "garnier/quantize.hpp"

#include <algorithm>
#include <sstream>

#include "garnier/branch.hpp"
#include "garnier/error.hpp"
#include "garnier/roots.hpp"

namespace garnier::quantize {

namespace {

constexpr std::array<std::array<int, 2>, 6> kPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

Mat2 load(std::span<const Cx> y, std::size_t at) { return {y[at], y[at + 1], y[at + 2], y[at + 3]}; }

void store(std::span<Cx> y, std::size_t at, const Mat2& m) {
  y[at] = m.a11;
  y[at + 1] = m.a12;
  y[at + 2] = m.a21;
  y[at + 3] = m.a22;
}

Mat2 connection(const Times& t, const Residues& A, Cx x) {
  Mat2 a = Mat2::zero();
  for (int i = 0; i < 4; ++i) a += A[i] / (x - t[i]);
  return a;
}

/// Layout of the time-flow state: 4 residues, Phi at x, Phi at y, ln tau.
constexpr std::size_t kPhiX = 16, kPhiY = 20, kTau = 24, kTimeDim = 25;

/// Flow along the times listed in idx (path coordinate k moves t[idx[k]]).
Field time_field(Times t0, std::vector<int> idx, Cx x, Cx y) {
  return [t0, idx, x, y](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> s, std::span<Cx> ds) {
    Times t = t0;
    for (std::size_t k = 0; k < idx.size(); ++k) t[idx[k]] = p[k];
    Residues B;
    for (int i = 0; i < 4; ++i) B[i] = load(s, 4 * i);
    const Mat2 phx = load(s, kPhiX), phy = load(s, kPhiY);
    const auto dtau = schlesinger::tau_logderiv_all(t, B);
    std::array<Mat2, 4> dB{};
    Mat2 dphx = Mat2::zero(), dphy = Mat2::zero();
    Cx dlt = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const int i = idx[k];
      const auto f = schlesinger::flow_rhs(t, B, i);
      for (int j = 0; j < 4; ++j) dB[j] += d[k] * f[j];
      dphx -= d[k] * (B[i] / (x - t[i])) * phx;
      dphy -= d[k] * (B[i] / (y - t[i])) * phy;
      dlt += d[k] * dtau[i];
    }
    for (int j = 0; j < 4; ++j) store(ds, 4 * j, dB[j]);
    store(ds, kPhiX, dphx);
    store(ds, kPhiY, dphy);
    ds[kTau] = dlt;
  };
}

Field x_field(Times t, Residues A) {
  return [t, A](std::span<const Cx> p, std::span<const Cx> d, std::span<const Cx> s, std::span<Cx> ds) {
    store(ds, 0, d[0] * connection(t, A, p[0]) * load(s, 0));
  };
}

CVec pack_time_state(const FieldPoint& p) {
  CVec y(kTimeDim);
  for (int i = 0; i < 4; ++i) store(y, 4 * i, p.B[i]);
  store(y, kPhiX, p.phi_x);
  store(y, kPhiY, p.phi_y);
  y[kTau] = p.ln_tau;
  return y;
}

void unpack_time_state(const CVec& y, FieldPoint& p) {
  for (int i = 0; i < 4; ++i) p.B[i] = load(y, 4 * i);
  p.phi_x = load(y, kPhiX);
  p.phi_y = load(y, kPhiY);
  p.ln_tau = y[kTau];
}

/// Continues every tracked logarithm from the configuration in `from` to the
/// one in `to`. Each tracked difference moves linearly along a straight leg,
/// so a single ratio step follows the continuous branch.
void continue_logs(const FieldPoint& from, FieldPoint& to) {
  for (int i = 0; i < 4; ++i) {
    to.log_xt[i] = log_continue(to.x - to.t[i], from.x - from.t[i], from.log_xt[i]);
    to.log_yt[i] = log_continue(to.y - to.t[i], from.y - from.t[i], from.log_yt[i]);
  }
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    const auto [i, j] = kPairs[k];
    to.log_tt[k] = log_continue(to.t[i] - to.t[j], from.t[i] - from.t[j], from.log_tt[k]);
  }
}

void check_off_poles(const Times& t, Cx z, const char* what) {
  for (int i = 0; i < 4; ++i) {
    if (std::abs(z - t[i]) < 1e-12) {
      std::ostringstream os;
      os << what << " sits on the pole t" << (i + 1) << " = " << t[i];
      fail(ErrorKind::PoleEvaluation, os.str());
    }
  }
}

/// Adaptive x- or y-transport of one Phi along base -> via... -> end.
Mat2 transport_x(const Times& t, const Residues& B, Mat2 phi, Cx from, const std::vector<Cx>& via, Cx to,
                 const OdeOptions& options, FieldPoint& p, bool is_x) {
  std::vector<Cx> pts{from};
  pts.insert(pts.end(), via.begin(), via.end());
  pts.push_back(to);
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    if (pts[k + 1] == pts[k]) continue;
    PathPlan path = PathPlan::line({pts[k]}, {pts[k + 1]});
    for (int i = 0; i < 4; ++i) path.singular.push_back(Singularity::point(t[i], "pole"));
    const CVec y0{phi.a11, phi.a12, phi.a21, phi.a22};
    const auto traj = ode_integrate(x_field(t, B), y0, path, options);
    phi = load(traj.final_state(), 0);
    FieldPoint next = p;
    (is_x ? next.x : next.y) = pts[k + 1];
    continue_logs(p, next);
    p = next;
  }
  return phi;
}

}  // namespace

Frame make_frame(const SchlesingerState& s, Cx base_x) {
  check_off_poles(s.times(), base_x, "frame base point");
  SchlesingerState b = s;
  b.A = schlesinger::b_residues(s);
  b.norm = schlesinger::Norm::B;
  return {b, base_x};
}

FieldPoint locate(const Frame& frame, Cx x, Cx y, Cx t1, Cx t2, const OdeOptions& options, const Route& route) {
  const auto& b = frame.base;
  FieldPoint p;
  p.t = b.times();
  p.B = b.A;
  p.theta = b.theta;
  p.x = p.y = frame.base_x;
  p.phi_x = p.phi_y = Mat2::identity();
  p.ln_tau = 0.0;
  for (int i = 0; i < 4; ++i) p.log_xt[i] = p.log_yt[i] = std::log(frame.base_x - p.t[i]);
  p.log_tt = principal_log_tt(p.t);

  if (t1 != b.t1 || t2 != b.t2) {
    PathPlan path = schlesinger::time_path({{b.t1, b.t2}, {t1, t2}});
    path.singular.push_back(Singularity::coordinate(2, 0, frame.base_x, "t1 = base x"));
    path.singular.push_back(Singularity::coordinate(2, 1, frame.base_x, "t2 = base x"));
    const auto traj = ode_integrate(time_field(p.t, {0, 1}, p.x, p.y), pack_time_state(p), path, options);
    FieldPoint next = p;
    next.t[0] = t1;
    next.t[1] = t2;
    unpack_time_state(traj.final_state(), next);
    continue_logs(p, next);
    p = next;
  }
  check_off_poles(p.t, x, "x");
  check_off_poles(p.t, y, "y");
  p.phi_x = transport_x(p.t, p.B, p.phi_x, p.x, route.x_via, x, options, p, true);
  p.phi_y = transport_x(p.t, p.B, p.phi_y, p.y, route.y_via, y, options, p, false);
  return p;
}

FieldPoint move(const FieldPoint& p, const Displacement& d, int steps) {
  FieldPoint cur = p;
  for (int i = 0; i < 4; ++i) {
    if (d.dt[i] == Cx(0.0)) continue;
    const CVec from{cur.t[i]}, to{cur.t[i] + d.dt[i]};
    const CVec y = rk_fixed(time_field(cur.t, {i}, cur.x, cur.y), pack_time_state(cur), from, to, steps);
    FieldPoint next = cur;
    next.t[i] = to[0];
    unpack_time_state(y, next);
    continue_logs(cur, next);
    cur = next;
  }
  for (int leg = 0; leg < 2; ++leg) {
    const Cx delta = leg == 0 ? d.dx : d.dy;
    if (delta == Cx(0.0)) continue;
    Cx& z = leg == 0 ? cur.x : cur.y;
    Mat2& phi = leg == 0 ? cur.phi_x : cur.phi_y;
    const CVec from{z}, to{z + delta};
    const CVec y = rk_fixed(x_field(cur.t, cur.B), {phi.a11, phi.a12, phi.a21, phi.a22}, from, to, steps);
    FieldPoint next = cur;
    (leg == 0 ? next.x : next.y) = to[0];
    (leg == 0 ? next.phi_x : next.phi_y) = load(y, 0);
    continue_logs(cur, next);
    cur = next;
  }
  return cur;
}

Transported transport_phi(const SchlesingerState& s, Cx x0, const Mat2& phi0, const std::vector<Leg>& legs,
                          const OdeOptions& options) {
  SchlesingerState st = s;
  Cx x = x0;
  Mat2 phi = phi0;
  for (const Leg& leg : legs) {
    const Times t = st.times();
    if (leg.kind == Leg::Kind::X) {
      if (leg.to == x) continue;
      PathPlan path = PathPlan::line({x}, {leg.to});
      for (int i = 0; i < 4; ++i) path.singular.push_back(Singularity::point(t[i], "pole"));
      const auto traj = ode_integrate(x_field(t, st.A), {phi.a11, phi.a12, phi.a21, phi.a22}, path, options);
      phi = load(traj.final_state(), 0);
      x = leg.to;
    } else {
      if (leg.index != 0 && leg.index != 1) fail(ErrorKind::InvalidPath, "time legs move t1 or t2 only");
      const int i = leg.index;
      if (leg.to == t[i]) continue;
      PathPlan path = PathPlan::line({t[i]}, {leg.to});
      path.singular.push_back(Singularity::point(x, "t = x"));
      for (int j = 0; j < 4; ++j)
        if (j != i) path.singular.push_back(Singularity::point(t[j], "time collision"));
      FieldPoint fp;
      fp.B = st.A;
      fp.phi_x = fp.phi_y = phi;
      const auto traj = ode_integrate(time_field(t, {i}, x, x), pack_time_state(fp), path, options);
      unpack_time_state(traj.final_state(), fp);
      st.A = fp.B;
      phi = fp.phi_x;
      (i == 0 ? st.t1 : st.t2) = leg.to;
    }
  }
  return {st, x, phi};
}

std::array<Cx, 6> principal_log_tt(const Times& t) {
  std::array<Cx, 6> out;
  for (std::size_t k = 0; k < kPairs.size(); ++k) out[k] = std::log(t[kPairs[k][0]] - t[kPairs[k][1]]);
  return out;
}

Cx gauge_exponent_S(const ThetaGO& theta, const std::array<Cx, 6>& log_tt) {
  Cx s = 0.0;
  for (std::size_t k = 0; k < kPairs.size(); ++k) {
    s += 0.5 * theta.theta[kPairs[k][0]] * theta.theta[kPairs[k][1]] * log_tt[k];
  }
  return s;
}

std::array<Cx, 4> gauge_S_derivative(const Times& t, const ThetaGO& theta) {
  schlesinger::check_times(t);
  std::array<Cx, 4> d{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j)
      if (j != i) d[i] += theta.theta[j] / (t[i] - t[j]);
    d[i] *= 0.5 * theta.theta[i];
  }
  return d;
}

Mat2 build_M(const FieldPoint& p) {
  if (std::abs(p.phi_x.det()) < 1e-12) fail(ErrorKind::NearSingularPhi, "Phi(x) is nearly singular");
  return std::exp(p.ln_tau) * (p.phi_x.inverse() * p.phi_y);
}

Mat2 gauge_to_Y(const Mat2& M, Cx x, Cx y, const std::array<Cx, 4>& log_xt, const std::array<Cx, 4>& log_yt,
                const ThetaGO& theta, Cx S, double radius) {
  if (std::abs(x - y) < radius) fail(ErrorKind::DiagonalCollision, "x and y collide");
  Cx log_g = S;
  for (int i = 0; i < 4; ++i) log_g += 0.5 * theta.theta[i] * (log_xt[i] + log_yt[i]);
  return M / ((x - y) * std::exp(log_g));
}

Mat2 evaluate_Y(const FieldPoint& p) {
  return gauge_to_Y(build_M(p), p.x, p.y, p.log_xt, p.log_yt, p.theta, gauge_exponent_S(p.theta, p.log_tt));
}

YJet y_jet(const FieldPoint& p, const FDScheme& fd, bool with_outer_times) {
  YJet j;
  j.y = evaluate_Y(p);
  auto along_x = [&](double h) { return evaluate_Y(move(p, {h, 0.0, {}})); };
  auto along_y = [&](double h) { return evaluate_Y(move(p, {0.0, h, {}})); };
  j.y_x = fd_offset_derivative(along_x, fd.step_at(p.x), fd);
  j.y_y = fd_offset_derivative(along_y, fd.step_at(p.y), fd);
  j.y_xx = fd_offset_second_derivative(along_x, fd.step_at(p.x), fd);
  j.y_yy = fd_offset_second_derivative(along_y, fd.step_at(p.y), fd);
  for (int i = 0; i < 4; ++i) {
    if (i >= 2 && !with_outer_times) continue;
    auto along_t = [&](double h) {
      Displacement d;
      d.dt[i] = h;
      return evaluate_Y(move(p, d));
    };
    j.y_t[i] = fd_offset_derivative(along_t, fd.step_at(p.t[i]), fd);
  }
  return j;
}

EntryResidual worst_entry(const Terms& terms) {
  EntryResidual worst;
  bool first = true;
  for (int e = 0; e < 4; ++e) {
    Cx sum = 0.0;
    double scale = 0.0;
    for (const Mat2& m : terms) {
      const Cx v = m.entries()[e];
      sum += v;
      scale = std::max(scale, std::abs(v));
    }
    const EntryResidual r{std::abs(sum), std::abs(sum) / (scale + 1e-300), scale};
    if (!std::isfinite(r.abs)) fail(ErrorKind::StencilFailure, "non-finite residual");
    if (first || r.rel > worst.rel) worst = r;
    first = false;
  }
  return worst;
}

std::array<Terms, 4> bpz_terms(const YJet& j, const FieldPoint& p) {
  const auto& t = p.t;
  const auto& th = p.theta.theta;
  const Cx x = p.x, y = p.y;
  std::array<Terms, 4> out;
  for (int side = 0; side < 2; ++side) {
    const Cx z = side == 0 ? x : y;
    const Mat2& yz = side == 0 ? j.y_x : j.y_y;
    const Mat2& yzz = side == 0 ? j.y_xx : j.y_yy;
    Terms terms;
    Cx c = 0.0;
    for (int i = 0; i < 4; ++i) {
      terms.push_back(j.y_t[i] / (z - t[i]));
      c += th[i] / (z - t[i]);
    }
    terms.push_back(-yzz);
    terms.push_back(-j.y_x / (x - y));
    terms.push_back(j.y_y / (x - y));
    terms.push_back(-c * yz);
    out[side] = std::move(terms);
  }
  out[2] = {j.y_t[0], j.y_t[1], j.y_t[2], j.y_t[3], j.y_x, j.y_y};
  out[3] = {t[0] * j.y_t[0], t[1] * j.y_t[1], t[2] * j.y_t[2], t[3] * j.y_t[3],
            x * j.y_x,       y * j.y_y,       -p.theta.bpz_lambda() * j.y};
  return out;
}

std::array<Terms, 2> kevol_terms(const YJet& j, const FieldPoint& p) {
  const Cx t1 = p.t[0], t2 = p.t[1], x = p.x, y = p.y;
  const auto& th = p.theta.theta;
  const Cx lam = p.theta.bpz_lambda();
  std::array<Terms, 2> out;
  for (int k = 0; k < 2; ++k) {
    // k = 0: evolution in t1; k = 1: the same with the roles of t1, t2 swapped.
    const Cx ta = k == 0 ? t1 : t2, tb = k == 0 ? t2 : t1;
    const Cx tha = th[k], thb = th[1 - k];
    auto coef = [&](Cx z) { return tha / (z - ta) + (thb + 1.0) / (z - tb) + (th[2] + 1.0) / (z - 1.0) + (th[3] + 1.0) / z; };
    const Cx px = (x - ta) * (y - ta) * (x - tb) * (x - 1.0) * x / (y - x);
    const Cx py = (x - ta) * (y - ta) * (y - tb) * (y - 1.0) * y / (y - x);
    out[k] = {ta * (ta - 1.0) * (ta - tb) * j.y_t[k],
              -px * j.y_xx,
              -px * coef(x) * j.y_x,
              px * lam / (x * (x - 1.0)) * j.y,
              py * j.y_yy,
              py * coef(y) * j.y_y,
              -py * lam / (y * (y - 1.0)) * j.y};
  }
  return out;
}

void ResidualReport::add(Cx x, Cx y, const EntryResidual& r) {
  points.push_back({x, y, r.abs, r.rel});
  max_abs = std::max(max_abs, r.abs);
  if (points.size() == 1 || r.rel > max_rel) {
    max_rel = r.rel;
    normalization = r.scale;
  }
}

std::vector<GridPoint> make_xy_grid(Cx base_x, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GridPoint> grid;
  while (grid.size() < n) {
    const Cx x = base_x + rng.complex_box(-1.2, 1.2, -0.9, 0.9);
    const Cx y = base_x + rng.complex_box(-1.2, 1.2, -0.9, 0.9);
    if (x.imag() > -0.3 || y.imag() > -0.3 || std::abs(x - y) < 0.3) continue;
    grid.push_back({x, y});
  }
  return grid;
}

namespace {

template <std::size_t N, class Eval>
std::array<ResidualReport, N> run_grid(const std::array<const char*, N>& ids, const std::vector<GridPoint>& grid,
                                       const FDScheme& fd, const Eval& eval) {
  fd.validate();
  std::array<ResidualReport, N> reports;
  for (std::size_t k = 0; k < N; ++k) {
    reports[k].equation_id = ids[k];
    reports[k].fd = fd;
  }
  for (const GridPoint& g : grid) {
    const std::array<Terms, N> terms = eval(g);
    for (std::size_t k = 0; k < N; ++k) reports[k].add(g.x, g.y, worst_entry(terms[k]));
  }
  return reports;
}

}  // namespace

std::array<ResidualReport, 4> bpz_residual(const Frame& frame, const std::vector<GridPoint>& grid, Cx t1, Cx t2,
                                           const FDScheme& fd, const OdeOptions& options) {
  return run_grid<4>({"bpz-x", "bpz-y", "translation", "homogeneity"}, grid, fd, [&](const GridPoint& g) {
    const FieldPoint p = locate(frame, g.x, g.y, t1, t2, options);
    return bpz_terms(y_jet(p, fd, true), p);
  });
}

std::array<ResidualReport, 2> kevol_residual(const Frame& frame, const std::vector<GridPoint>& grid, Cx t1, Cx t2,
                                             const FDScheme& fd, const OdeOptions& options) {
  return run_grid<2>({"kevol-t1", "kevol-t2"}, grid, fd, [&](const GridPoint& g) {
    const FieldPoint p = locate(frame, g.x, g.y, t1, t2, options);
    return kevol_terms(y_jet(p, fd, false), p);
  });
}

std::array<Cx, 2> zeta_eta_map(Cx x, Cx y, Cx t1, Cx t2) {
  if (std::abs(t1 - t2) < 1e-12) fail(ErrorKind::TimeCollision, "t1 = t2");
  if (std::abs(x - 1.0) < 1e-12 || std::abs(y - 1.0) < 1e-12) fail(ErrorKind::PoleEvaluation, "x or y equals 1");
  const Cx den = (t1 - t2) * (x - 1.0) * (y - 1.0);
  return {(1.0 - t2) * (x - t1) * (y - t1) / den, -(1.0 - t1) * (x - t2) * (y - t2) / den};
}

std::array<Cx, 2> zeta_eta_inverse(Cx zeta, Cx eta, Cx t1, Cx t2, std::array<Cx, 2> hint) {
  const Cx D = t1 - t2;
  if (std::abs(D) < 1e-12) fail(ErrorKind::TimeCollision, "t1 = t2");
  // Both relations are linear in e1 = x + y and e2 = xy.
  const Cx a11 = -zeta * D + (1.0 - t2) * t1, a12 = zeta * D - (1.0 - t2);
  const Cx b1 = (1.0 - t2) * t1 * t1 - zeta * D;
  const Cx a21 = -eta * D - (1.0 - t1) * t2, a22 = eta * D + (1.0 - t1);
  const Cx b2 = -(1.0 - t1) * t2 * t2 - eta * D;
  const Cx det = a11 * a22 - a12 * a21;
  const double scale = std::max({std::abs(a11 * a22), std::abs(a12 * a21), 1e-300});
  if (std::abs(det) < 1e-13 * scale) fail(ErrorKind::DegenerateJacobian, "(zeta, eta) map is degenerate here");
  const Cx e1 = (b1 * a22 - a12 * b2) / det;
  const Cx e2 = (a11 * b2 - b1 * a21) / det;
  auto r = quad_roots(1.0, -e1, e2);
  const double keep = std::abs(r[0] - hint[0]) + std::abs(r[1] - hint[1]);
  const double swap = std::abs(r[1] - hint[0]) + std::abs(r[0] - hint[1]);
  if (std::abs(keep - swap) < 1e-12) fail(ErrorKind::BranchAmbiguity, "both orderings are equally close to the hint");
  if (swap < keep) std::swap(r[0], r[1]);
  return r;
}

AlphaBeta solve_alpha_beta(const ThetaGO& theta, AlphaBranch a, BetaBranch b) {
  const auto& th = theta.theta;
  const Cx alpha = a == AlphaBranch::Zero ? Cx(0.0) : -th[3];
  const Cx lam = theta.bpz_lambda();
  const Cx lin = th[2] + 2.0 * alpha + th[3] + 1.0 + th[0] + th[1] + 1.0;
  const Cx c = (th[2] + 1.0) * alpha + (th[0] + th[1] + 1.0) * alpha - lam;
  auto r = quad_roots(1.0, lin, c);
  if (std::abs(r[0]) > std::abs(r[1])) std::swap(r[0], r[1]);
  return {alpha, b == BetaBranch::Small ? r[0] : r[1], a};
}

Mat2 V_from_Y(const Mat2& Y, const std::array<Cx, 4>& log_xt, const std::array<Cx, 4>& log_yt, const AlphaBeta& ab) {
  // Index 2 is the pole at 1, index 3 the pole at 0.
  for (const Cx l : {log_xt[2], log_xt[3], log_yt[2], log_yt[3]}) {
    if (!is_finite(l) || l.real() < std::log(1e-12)) fail(ErrorKind::PoleEvaluation, "x or y on {0, 1}");
  }
  const Cx log_pref = ab.alpha * (log_xt[3] + log_yt[3]) + ab.beta * (log_xt[2] + log_yt[2]);
  return Y / std::exp(log_pref);
}

Mat2 evaluate_V(const FieldPoint& p, const AlphaBeta& ab) { return V_from_Y(evaluate_Y(p), p.log_xt, p.log_yt, ab); }

VJet v_jet(const FieldPoint& p, const AlphaBeta& ab, const FDScheme& fd) {
  const Cx t1 = p.t[0], t2 = p.t[1];
  const auto ze = zeta_eta_map(p.x, p.y, t1, t2);
  auto at = [&](Cx zeta, Cx eta, Cx dt1, Cx dt2) {
    const auto xy = zeta_eta_inverse(zeta, eta, t1 + dt1, t2 + dt2, {p.x, p.y});
    return evaluate_V(move(p, {xy[0] - p.x, xy[1] - p.y, {dt1, dt2, 0.0, 0.0}}), ab);
  };
  // Steps are sized so the implied (x, y) displacement matches the scheme's
  // step there; near a degenerate Jacobian a fixed (zeta, eta) step would
  // move far in (x, y).
  const double hxy = 1e-6 * (1.0 + std::max(std::abs(p.x), std::abs(p.y)));
  const auto fx = zeta_eta_map(p.x + hxy, p.y, t1, t2), bx = zeta_eta_map(p.x - hxy, p.y, t1, t2);
  const auto fy = zeta_eta_map(p.x, p.y + hxy, t1, t2), by = zeta_eta_map(p.x, p.y - hxy, t1, t2);
  const Mat2 jac{(fx[0] - bx[0]) / (2.0 * hxy), (fy[0] - by[0]) / (2.0 * hxy), (fx[1] - bx[1]) / (2.0 * hxy),
                 (fy[1] - by[1]) / (2.0 * hxy)};
  const Mat2 inv = jac.inverse();
  const double target = fd.step * (1.0 + std::max(std::abs(p.x), std::abs(p.y)));
  const double hz = target / std::max(std::max(std::abs(inv.a11), std::abs(inv.a21)), 1e-300);
  const double he = target / std::max(std::max(std::abs(inv.a12), std::abs(inv.a22)), 1e-300);
  auto along_z = [&](double h) { return at(ze[0] + h, ze[1], 0.0, 0.0); };
  auto along_e = [&](double h) { return at(ze[0], ze[1] + h, 0.0, 0.0); };
  VJet j;
  j.v = evaluate_V(p, ab);
  j.v_z = fd_offset_derivative(along_z, hz, fd);
  j.v_e = fd_offset_derivative(along_e, he, fd);
  j.v_zz = fd_offset_second_derivative(along_z, hz, fd);
  j.v_ee = fd_offset_second_derivative(along_e, he, fd);
  j.v_ze = fd_offset_mixed([&](double a, double b) { return at(ze[0] + a, ze[1] + b, 0.0, 0.0); }, hz, he, fd);
  j.v_t1 = fd_offset_derivative([&](double h) { return at(ze[0], ze[1], h, 0.0); }, fd.step_at(t1), fd);
  j.v_t2 = fd_offset_derivative([&](double h) { return at(ze[0], ze[1], 0.0, h); }, fd.step_at(t2), fd);
  return j;
}

std::array<Terms, 2> quantized_pg_terms(const VJet& j, Cx z, Cx e, Cx t1, Cx t2, const ThetaGO& theta,
                                        const AlphaBeta& ab) {
  const auto& th = theta.theta;
  const Cx T1 = th[0], T2 = th[1], T3 = th[2], T4 = th[3], al = ab.alpha, be = ab.beta;
  const Cx D = t1 - t2, g = T3 + 2.0 * be - 1.0;
  std::array<Terms, 2> out;
  {
    const Cx azz = z * z * z - (t1 + 1.0) * z * z + t1 * z - t1 * (t1 - 1.0) * z * e / D;
    const Cx aze = 2.0 * z * z * e + 2.0 * t1 * (t2 - 1.0) * z * e / D;
    const Cx aee = z * e * e - t2 * (t1 - 1.0) * z * e / D;
    const Cx az = -g * z * z + t1 * z * (T2 + T3 + T4 + 2.0 * al + 2.0 * be) - z * (T1 + T2 + T4 + 2.0 * al + 2.0) +
                  t1 * (T1 + 1.0) - (T1 + 1.0) * t1 * (t1 - 1.0) * e / D + (T2 + 1.0) * t2 * (t1 - 1.0) * z / D;
    const Cx ae = -g * z * e + (T1 + 1.0) * t1 * (t2 - 1.0) * e / D - (T2 + 1.0) * t2 * (t1 - 1.0) * z / D;
    const Cx a0 = be * (be + T3) * z + (t1 - 1.0) * T1 * al + t1 * T1 * be;
    out[0] = {t1 * (t1 - 1.0) * j.v_t1, -azz * j.v_zz, -aze * j.v_ze, -aee * j.v_ee,
              -az * j.v_z,              -ae * j.v_e,   -a0 * j.v};
  }
  {
    const Cx aee = e * e * e - (t2 + 1.0) * e * e + t2 * e + t2 * (t2 - 1.0) * z * e / D;
    const Cx aze = 2.0 * e * e * z - 2.0 * t2 * (t1 - 1.0) * z * e / D;
    const Cx azz = e * z * z + t1 * (t2 - 1.0) * z * e / D;
    const Cx ae = -g * e * e + t2 * e * (T1 + T3 + T4 + 2.0 * al + 2.0 * be) - e * (T1 + T2 + T4 + 2.0 * al + 2.0) +
                  t2 * (T2 + 1.0) + (T2 + 1.0) * t2 * (t2 - 1.0) * z / D - (T1 + 1.0) * t1 * (t2 - 1.0) * e / D;
    const Cx az = -g * z * e - (T2 + 1.0) * t2 * (t1 - 1.0) * z / D + (T1 + 1.0) * t1 * (t2 - 1.0) * e / D;
    const Cx a0 = be * (be + T3) * e + (t2 - 1.0) * T2 * al + t2 * T2 * be;
    out[1] = {t2 * (t2 - 1.0) * j.v_t2, -azz * j.v_zz, -aze * j.v_ze, -aee * j.v_ee,
              -az * j.v_z,              -ae * j.v_e,   -a0 * j.v};
  }
  return out;
}

std::array<ResidualReport, 2> quantized_pg_residual(const Frame& frame, const std::vector<GridPoint>& grid, Cx t1,
                                                    Cx t2, const AlphaBeta& ab, const FDScheme& fd,
                                                    const OdeOptions& options) {
  return run_grid<2>({"quantized-pg-t1", "quantized-pg-t2"}, grid, fd, [&](const GridPoint& g) {
    const FieldPoint p = locate(frame, g.x, g.y, t1, t2, options);
    const auto ze = zeta_eta_map(p.x, p.y, t1, t2);
    return quantized_pg_terms(v_jet(p, ab, fd), ze[0], ze[1], t1, t2, p.theta, ab);
  });
}

namespace {

Cx z_value(const FieldPoint& p, int column) {
  Cx log_g = 0.0;
  for (int i = 0; i < 4; ++i) log_g += 0.5 * p.theta.theta[i] * p.log_xt[i];
  return std::exp(log_g) * (column == 0 ? p.phi_x.a11 : p.phi_x.a12);
}

}  // namespace

ZJet z_jet(const FieldPoint& p, int column, const FDScheme& fd) {
  auto along = [&](double h) { return z_value(move(p, {h, 0.0, {}}), column); };
  const double h = fd.step_at(p.x);
  return {z_value(p, column), fd_offset_derivative(along, h, fd), fd_offset_second_derivative(along, h, fd)};
}

GarxReport garx_residual(const Frame& frame, Cx t1, Cx t2, const std::vector<Cx>& x_samples, const FDScheme& fd,
                         const OdeOptions& options) {
  fd.validate();
  GarxReport out;
  out.equation.equation_id = "garx";
  out.abel.equation_id = "garx-abel";
  out.equation.fd = out.abel.fd = fd;
  okamoto::GOState g;
  Cx K1 = 0.0, K2 = 0.0;
  bool have_go = false;
  for (const Cx x : x_samples) {
    const FieldPoint p = locate(frame, x, frame.base_x, t1, t2, options);
    if (!have_go) {
      SchlesingerState s{p.t[0], p.t[1], p.B, schlesinger::Norm::B, p.theta};
      g = okamoto::extract_go(s);
      K1 = okamoto::hamiltonian_K(1, g);
      K2 = okamoto::hamiltonian_K(2, g);
      have_go = true;
    }
    const auto c = okamoto::garx_coefficients(g, K1, K2, x);
    EntryResidual worst;
    for (int col = 0; col < 2; ++col) {
      const ZJet z = z_jet(p, col, fd);
      const Terms terms{Mat2::diag(z.z_xx, 0.0), Mat2::diag(-c.coef_zprime * z.z_x, 0.0), Mat2::diag(-c.coef_z * z.z, 0.0)};
      const EntryResidual r = worst_entry(terms);
      if (col == 0 || r.rel > worst.rel) worst = r;
    }
    out.equation.add(x, 0.0, worst);

    auto wronskian = [&](double h) {
      const FieldPoint q = move(p, {h, 0.0, {}});
      const ZJet a = z_jet(q, 0, fd), b = z_jet(q, 1, fd);
      return Mat2::diag(a.z * b.z_x - b.z * a.z_x, 0.0);
    };
    const Cx w = wronskian(0.0).a11;
    const Cx dw = fd_offset_derivative(wronskian, fd.step_at(x), fd).a11;
    out.abel.add(x, 0.0, worst_entry({Mat2::diag(dw, 0.0), Mat2::diag(-c.coef_zprime * w, 0.0)}));
  }
  return out;
}

}  // namespace garnier::quantize
