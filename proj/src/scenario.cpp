#include "garnier/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <chrono>
#include <cstdio>
#include <set>
#include <sstream>

#include "garnier/branch.hpp"
#include "garnier/error.hpp"

namespace garnier::scenario {

namespace {

using quantize::Frame;
using schlesinger::SchlesingerState;
using schlesinger::ThetaGO;

const std::array<Cx, 4> kDefaultTheta{Cx(0.3, 0.1), Cx(0.45, -0.2), Cx(0.27, 0.05), Cx(0.61, 0.13)};
/// Times at which frames are probed, relative to the frame base times.
const Cx kProbeShift1(0.1, -0.05), kProbeShift2(0.05, 0.1);

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  fail(ErrorKind::ConfigInvalid, "field '" + field + "': " + what);
}

bool uses_pg_theta(Mode m) { return m == Mode::GarnierPoly || m == Mode::Bridge || m == Mode::PVI; }

polynomial::ThetaPG default_pg_theta(Mode m) {
  auto th = polynomial::ThetaPG::with_fuchs(Cx(0.3, 0.1), Cx(0.45, -0.2), Cx(0.27, 0.05), Cx(0.61, 0.13),
                                            Cx(-0.8, 0.3));
  if (m == Mode::PVI) {
    // thinf1 = thinf2 + 1 together with the Fuchs relation.
    const Cx rest = th.th0 + th.th1 + th.tht1 + th.tht2;
    th.thinf2 = -(rest + 1.0) / 2.0;
    th.thinf1 = th.thinf2 + 1.0;
  }
  return th;
}

std::array<Cx, 4> go_theta(const ScenarioConfig& c) {
  return c.theta.is_null() ? kDefaultTheta : io::theta_go_from_json(c.theta).theta;
}

polynomial::ThetaPG pg_theta(const ScenarioConfig& c) {
  return c.theta.is_null() ? default_pg_theta(c.mode) : io::theta_pg_from_json(c.theta);
}

int default_count(Mode m) {
  switch (m) {
    case Mode::Schlesinger: return 20;
    case Mode::GarnierPoly: return 200;
    case Mode::Bridge: return 30;
    default: return 5;
  }
}

int default_grid(Mode m) {
  switch (m) {
    case Mode::Bpz:
    case Mode::QuantizeGO: return 50;
    case Mode::QuantizePG:
    case Mode::GarnierGO: return 20;
    default: return 0;
  }
}

std::vector<SchlesingerState> schlesinger_states(const ScenarioConfig& c) {
  if (c.state) return {io::schlesinger_from_json(*c.state)};
  std::vector<SchlesingerState> out;
  const auto th = go_theta(c);
  for (int k = 0; k < c.count; ++k) {
    out.push_back(schlesinger::random_b_state(th, c.t1, c.t2, c.seed + static_cast<std::uint64_t>(k)).state);
  }
  return out;
}

polynomial::PGState random_pg(Rng& rng, const ScenarioConfig& c, const polynomial::ThetaPG& th) {
  polynomial::PGState s;
  s.t1 = c.t1;
  s.t2 = c.t2;
  s.q = {Cx(0.3, 0.4) + rng.complex_normal(0.3), Cx(-0.2, 0.5) + rng.complex_normal(0.3)};
  s.p = {rng.complex_normal(0.5), rng.complex_normal(0.5)};
  s.params = th;
  return s;
}

std::vector<polynomial::PGState> pg_states(const ScenarioConfig& c) {
  if (c.state) return {io::pg_from_json(*c.state)};
  std::vector<polynomial::PGState> out;
  const auto th = pg_theta(c);
  Rng rng(c.seed);
  for (int k = 0; k < c.count; ++k) out.push_back(random_pg(rng, c, th));
  return out;
}

PathPlan time_path_from(const ScenarioConfig& c, Cx t1, Cx t2) {
  if (!c.path.empty()) {
    if (std::abs(c.path.front()[0] - t1) > 1e-14 || std::abs(c.path.front()[1] - t2) > 1e-14) {
      fail(ErrorKind::InvalidPath, "path does not start at the state's times");
    }
    return schlesinger::time_path(c.path);
  }
  const Cx d(0.5, 0.5);
  return schlesinger::time_path({{t1, t2}, {t1 + d, t2 + d}});
}

OdeOptions with_samples(const OdeOptions& base, const PathPlan& path) {
  OdeOptions o = base;
  const double n = static_cast<double>(path.segments());
  o.samples = {0.0, 0.5 * n, n};
  return o;
}

Frame frame_for(const ScenarioConfig& c, const SchlesingerState& s) { return quantize::make_frame(s, c.base_x); }

class Recorder {
 public:
  explicit Recorder(RunReport& r) : r_(r) {}
  void metric(const std::string& name, double v) { r_.metrics.push_back({name, v}); }
  template <class F>
  void stage(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
      f();
    } catch (const NumericError& e) {
      const std::string what = e.what();
      const auto colon = what.find(": ");
      throw NumericError(e.kind(), "stage '" + name + "': " + (colon == std::string::npos ? what : what.substr(colon + 2)));
    }
    r_.seconds[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }

 private:
  RunReport& r_;
};

double rel_err(Cx a, Cx b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

void run_schlesinger(const ScenarioConfig& c, RunReport& r, Recorder& rec) {
  const auto states = schlesinger_states(c);
  const OdeOptions opts = c.tol.ode();
  rec.stage("conservation", [&] {
    double worst = 0.0;
    for (const auto& s : states) {
      const auto traj = schlesinger::integrate_schlesinger(s, time_path_from(c, s.t1, s.t2), opts);
      double d = 0.0;
      for (const auto& st : traj.states) d = std::max(d, schlesinger::measure_drift(s, st).max());
      r.drift.push_back(d);
      worst = std::max(worst, d);
    }
    rec.metric("conservation.max_drift", worst);
  });
  const std::size_t few = std::min<std::size_t>(5, states.size());
  rec.stage("transport", [&] {
    for (int i = 0; i < 2; ++i) {
      double worst = 0.0;
      for (std::size_t k = 0; k < few; ++k) {
        const auto& s = states[k];
        const Cx t0 = i == 0 ? s.t1 : s.t2;
        const Cx x1 = c.base_x + Cx(0.6, -0.3), t1 = t0 + Cx(0.25, 0.15);
        using quantize::Leg;
        const std::vector<Leg> loop{{Leg::Kind::X, i, x1}, {Leg::Kind::T, i, t1}, {Leg::Kind::X, i, c.base_x},
                                    {Leg::Kind::T, i, t0}};
        const auto out = quantize::transport_phi(s, c.base_x, Mat2::identity(), loop, opts);
        worst = std::max(worst, max_abs_diff(out.phi, Mat2::identity()));
      }
      rec.metric(i == 0 ? "transport.loop_x_t1" : "transport.loop_x_t2", worst);
    }
  });
  rec.stage("tau", [&] {
    double closed = 0.0, gauge = 0.0;
    const FDScheme fd = c.tol.fd();
    for (std::size_t k = 0; k < few; ++k) {
      SchlesingerState b = states[k];
      b.A = schlesinger::b_residues(b);
      b.norm = schlesinger::Norm::B;
      closed = std::max(closed, schlesinger::tau_closedness(b));
      const auto t = b.times();
      const auto expect = quantize::gauge_S_derivative(t, b.theta);
      const auto base = quantize::principal_log_tt(t);
      for (int i = 0; i < 4; ++i) {
        auto S = [&](Cx ti) {
          auto tt = t;
          tt[i] = ti;
          auto logs = quantize::principal_log_tt(tt);
          for (std::size_t m = 0; m < logs.size(); ++m)
            logs[m] = log_continue(std::exp(logs[m]), std::exp(base[m]), base[m]);
          return quantize::gauge_exponent_S(b.theta, logs);
        };
        gauge = std::max(gauge, rel_err(fd_derivative(S, t[i], fd), expect[i]));
      }
    }
    rec.metric("tau.closedness", closed);
    rec.metric("gauge_S.derivative", gauge);
  });
}

void run_garnier_go(const ScenarioConfig& c, RunReport& r, Recorder& rec) {
  const auto states = schlesinger_states(c);
  const OdeOptions opts = c.tol.ode();
  if (!okamoto::exponents_non_integer(states.front().theta)) {
    r.warnings.push_back("an integer local exponent: extraction of (lambda, mu) is not guaranteed to be regular");
  }
  rec.stage("cross_picture", [&] {
    double worst = 0.0;
    for (const auto& s : states) {
      const auto q = s.norm == schlesinger::Norm::Q ? s : schlesinger::shift_normalization(s, schlesinger::ShiftDir::BtoQ);
      const PathPlan path = time_path_from(c, q.t1, q.t2);
      const auto traj = schlesinger::integrate_schlesinger(q, path, with_samples(opts, path));
      for (const auto& st : traj.samples) worst = std::max(worst, okamoto::cross_picture_mismatch(st));
    }
    rec.metric("cross_picture.max_mismatch", worst);
  });
  rec.stage("garx", [&] {
    const Frame f = frame_for(c, states.front());
    Rng rng(c.seed);
    std::vector<Cx> xs;
    for (int k = 0; k < c.grid; ++k) xs.push_back(c.base_x + rng.complex_box(-0.8, 0.8, -0.8, 0.4));
    const auto g = quantize::garx_residual(f, f.base.t1, f.base.t2, xs, c.tol.fd(), opts);
    r.residuals.push_back(g.equation);
    r.residuals.push_back(g.abel);
    rec.metric("garx.max_rel", g.equation.max_rel);
    rec.metric("garx.abel_max_rel", g.abel.max_rel);
  });
}

void run_garnier_poly(const ScenarioConfig& c, RunReport&, Recorder& rec) {
  const auto states = pg_states(c);
  rec.stage("hamilton", [&] {
    double worst = 0.0, overlap = 0.0;
    const FDScheme fd = c.tol.fd();
    for (const auto& s : states) {
      const auto a = polynomial::pg_rhs_explicit(s);
      const auto b = polynomial::pg_rhs_from_hamiltonian(s, FDScheme{fd.order, 1e-4, fd.richardson, true});
      for (int k = 0; k < 4; ++k) {
        worst = std::max(worst, rel_err(b.d_t1[k], a.d_t1[k]));
        worst = std::max(worst, rel_err(b.d_t2[k], a.d_t2[k]));
      }
      const auto e = polynomial::explicit_terms(s);
      overlap = std::max(overlap, rel_err(e.opo, e.tqo));
    }
    rec.metric("hamilton.max_rel", worst);
    rec.metric("hamilton.opo_tqo", overlap);
  });
  rec.stage("linearization", [&] {
    double lin = 0.0, spec = 0.0;
    const std::size_t few = std::min<std::size_t>(5, states.size());
    for (std::size_t k = 0; k < few; ++k) {
      const auto& s = states[k];
      const PathPlan path = time_path_from(c, s.t1, s.t2);
      const auto traj = polynomial::integrate_pg(s, path, with_samples(c.tol.ode(), path));
      for (std::size_t m = 0; m < traj.states.size(); ++m)
        spec = std::max(spec, polynomial::spectrum_error(traj.states[m], traj.u[m]));
      for (std::size_t m = 0; m < traj.samples.size(); ++m)
        lin = std::max(lin, polynomial::linearization_residual(traj.samples[m], traj.sample_u[m]));
    }
    rec.metric("linearization.schlesinger_residual", lin);
    rec.metric("linearization.spectrum", spec);
  });
}

void run_bridge(const ScenarioConfig& c, RunReport&, Recorder& rec) {
  const auto states = pg_states(c);
  rec.stage("bridge", [&] {
    double lam = 0.0, mup = 0.0, round = 0.0;
    for (const auto& s : states) {
      const auto g = okamoto::extract_go(polynomial::to_schlesinger(s, 1.0));
      const auto l = polynomial::bridge_lambda_from_q(s.q[0], s.q[1], s.t1, s.t2);
      for (int k = 0; k < 2; ++k) lam = std::max(lam, rel_err(g.lambda[k], l[k]));
      const auto res = polynomial::mu_p_relations(s, g);
      for (int k = 0; k < 2; ++k) mup = std::max(mup, std::abs(res[k]) / std::max(1.0, std::abs(s.p[k])));
      const auto q = polynomial::bridge_q_from_lambda(l[0], l[1], s.t1, s.t2);
      for (int k = 0; k < 2; ++k) round = std::max(round, rel_err(q[k], s.q[k]));
    }
    rec.metric("bridge.lambda_vs_extraction", lam);
    rec.metric("bridge.mu_p", mup);
    rec.metric("bridge.roundtrip", round);
  });
}

std::vector<Frame> frames(const ScenarioConfig& c) {
  std::vector<Frame> out;
  for (const auto& s : schlesinger_states(c)) out.push_back(frame_for(c, s));
  return out;
}

void run_bpz(const ScenarioConfig& c, RunReport& r, Recorder& rec) {
  const auto fs = frames(c);
  const FDScheme fd = c.tol.fd();
  rec.stage("bpz", [&] {
    double worst = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const auto& f = fs[k];
      const auto grid = quantize::make_xy_grid(c.base_x, c.grid, c.seed + k);
      for (auto& rep : quantize::bpz_residual(f, grid, f.base.t1 + kProbeShift1, f.base.t2 + kProbeShift2, fd,
                                              c.tol.ode())) {
        worst = std::max(worst, rep.max_rel);
        r.residuals.push_back(std::move(rep));
      }
    }
    rec.metric("bpz.max_rel", worst);
  });
  rec.stage("bpz_degenerate", [&] {
    SchlesingerState z;
    z.t1 = c.t1;
    z.t2 = c.t2;
    z.norm = schlesinger::Norm::B;
    z.theta = ThetaGO::from_exponents({0.0, 0.0, 0.0, 0.0}, 0.0);
    const Frame f = frame_for(c, z);
    double worst = 0.0;
    for (auto& rep : quantize::bpz_residual(f, quantize::make_xy_grid(c.base_x, c.grid, c.seed), c.t1 + kProbeShift1,
                                            c.t2 + kProbeShift2, fd, c.tol.ode())) {
      worst = std::max(worst, rep.max_rel);
      rep.equation_id = "degenerate-" + rep.equation_id;
      r.residuals.push_back(std::move(rep));
    }
    rec.metric("bpz.degenerate_max_rel", worst);
  });
}

Cx entry_total(const quantize::Terms& terms, int e) {
  Cx s = 0.0;
  for (const Mat2& m : terms) s += m.entries()[e];
  return s;
}

void run_quantize_go(const ScenarioConfig& c, RunReport& r, Recorder& rec) {
  const auto fs = frames(c);
  const FDScheme fd = c.tol.fd();
  rec.stage("kevol", [&] {
    double worst = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const auto& f = fs[k];
      const auto grid = quantize::make_xy_grid(c.base_x, c.grid, c.seed + k);
      for (auto& rep : quantize::kevol_residual(f, grid, f.base.t1 + kProbeShift1, f.base.t2 + kProbeShift2, fd,
                                                c.tol.ode())) {
        worst = std::max(worst, rep.max_rel);
        r.residuals.push_back(std::move(rep));
      }
    }
    rec.metric("kevol.max_rel", worst);
  });
  rec.stage("kevol_swap", [&] {
    const auto& f = fs.front();
    const auto grid = quantize::make_xy_grid(c.base_x, std::min(c.grid, 5), c.seed);
    double worst = 0.0;
    for (const auto& g : grid) {
      const auto p = quantize::locate(f, g.x, g.y, f.base.t1 + kProbeShift1, f.base.t2 + kProbeShift2, c.tol.ode());
      const auto j = quantize::y_jet(p, fd, false);
      auto q = p;
      std::swap(q.t[0], q.t[1]);
      std::swap(q.theta.theta[0], q.theta.theta[1]);
      auto js = j;
      std::swap(js.y_t[0], js.y_t[1]);
      const auto a = quantize::kevol_terms(j, p), b = quantize::kevol_terms(js, q);
      for (int w = 0; w < 2; ++w) {
        for (int e = 0; e < 4; ++e) {
          double scale = 0.0;
          for (const Mat2& m : a[w]) scale = std::max(scale, std::abs(m.entries()[e]));
          worst = std::max(worst, std::abs(entry_total(a[w], e) - entry_total(b[1 - w], e)) / (scale + 1e-300));
        }
      }
    }
    rec.metric("kevol.swap", worst);
  });
}

void run_quantize_pg(const ScenarioConfig& c, RunReport& r, Recorder& rec) {
  const auto fs = frames(c);
  const FDScheme fd = c.tol.fd();
  rec.stage("quantized_pg", [&] {
    double worst = 0.0, round = 0.0;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const auto& f = fs[k];
      const Cx t1 = f.base.t1 + kProbeShift1, t2 = f.base.t2 + kProbeShift2;
      const auto grid = quantize::make_xy_grid(c.base_x, c.grid, c.seed + k);
      for (const auto& g : grid) {
        const auto ze = quantize::zeta_eta_map(g.x, g.y, t1, t2);
        const auto xy = quantize::zeta_eta_inverse(ze[0], ze[1], t1, t2, {g.x, g.y});
        const auto back = quantize::zeta_eta_map(xy[0], xy[1], t1, t2);
        round = std::max(round, (std::abs(back[0] - ze[0]) + std::abs(back[1] - ze[1])) /
                                    std::max(1.0, std::abs(ze[0]) + std::abs(ze[1])));
      }
      const auto ab = quantize::solve_alpha_beta(f.base.theta, c.alpha, c.beta);
      for (auto& rep : quantize::quantized_pg_residual(f, grid, t1, t2, ab, fd, c.tol.ode())) {
        worst = std::max(worst, rep.max_rel);
        r.residuals.push_back(std::move(rep));
      }
    }
    rec.metric("quantized_pg.max_rel", worst);
    rec.metric("zeta_eta.roundtrip", round);
  });
}

void run_pvi(const ScenarioConfig& c, RunReport&, Recorder& rec) {
  std::vector<polynomial::PGState> states;
  if (c.state) {
    states.push_back(io::pg_from_json(*c.state));
  } else {
    const auto th = pg_theta(c);
    Rng rng(c.seed);
    for (int k = 0; k < c.count; ++k) {
      auto s = random_pg(rng, c, th);
      s.q[1] = 1.0 - s.q[0];
      states.push_back(s);
    }
  }
  // Preconditions are checked for every state before anything is integrated.
  for (const auto& s : states) polynomial::pvi_reduce(s);
  rec.stage("pvi", [&] {
    double drift = 0.0, ham = 0.0;
    OdeOptions opts = c.tol.ode();
    opts.samples = {0.25, 0.5, 0.75, 1.0};
    for (const auto& s : states) {
      const Cx w0 = polynomial::pvi_omega(s.t1, s.t2);
      const auto traj = polynomial::integrate_pvi_segment(s, w0 + c.omega_step, opts);
      for (const auto& st : traj.states) drift = std::max(drift, std::abs(st.q[0] + st.q[1] - 1.0));
      for (const auto& st : traj.samples) ham = std::max(ham, polynomial::pvi_hamilton_residual(st));
    }
    rec.metric("pvi.constraint_drift", drift);
    rec.metric("pvi.hamilton_residual", ham);
  });
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::Schlesinger: return "schlesinger";
    case Mode::GarnierGO: return "garnier-go";
    case Mode::GarnierPoly: return "garnier-poly";
    case Mode::Bridge: return "bridge";
    case Mode::Bpz: return "bpz";
    case Mode::QuantizeGO: return "quantize-go";
    case Mode::QuantizePG: return "quantize-pg";
    case Mode::PVI: return "pvi";
  }
  return "?";
}

const std::vector<Mode>& all_modes() {
  static const std::vector<Mode> modes{Mode::Schlesinger, Mode::GarnierGO,  Mode::GarnierPoly, Mode::Bridge,
                                       Mode::Bpz,         Mode::QuantizeGO, Mode::QuantizePG,  Mode::PVI};
  return modes;
}

OdeOptions Tolerances::ode() const {
  OdeOptions o;
  o.rtol = rtol;
  o.atol = atol;
  return o;
}

FDScheme Tolerances::fd() const {
  FDScheme f;
  f.order = fd_order;
  f.step = fd_step;
  return f;
}

const std::map<std::string, Threshold>& default_thresholds() {
  static const std::map<std::string, Threshold> t{
      {"conservation.max_drift", {"1", 1e-9}},
      {"transport.loop_x_t1", {"2", 1e-8}},
      {"transport.loop_x_t2", {"2", 1e-8}},
      {"cross_picture.max_mismatch", {"3", 1e-6}},
      {"garx.max_rel", {"garx", 1e-6}},
      {"garx.abel_max_rel", {"garx", 1e-6}},
      {"hamilton.max_rel", {"4", 1e-8}},
      {"hamilton.opo_tqo", {"4", 1e-13}},
      {"linearization.schlesinger_residual", {"5", 1e-6}},
      {"linearization.spectrum", {"5", 1e-10}},
      {"bridge.lambda_vs_extraction", {"6", 1e-8}},
      {"bridge.mu_p", {"6", 1e-7}},
      {"bridge.roundtrip", {"6", 1e-10}},
      {"bpz.max_rel", {"7", 1e-5}},
      {"bpz.degenerate_max_rel", {"7", 1e-8}},
      {"kevol.max_rel", {"8", 1e-5}},
      {"kevol.swap", {"8", 1e-12}},
      {"quantized_pg.max_rel", {"9", 1e-4}},
      {"zeta_eta.roundtrip", {"9", 1e-10}},
      {"pvi.constraint_drift", {"10", 1e-9}},
      {"pvi.hamilton_residual", {"10", 1e-6}},
      {"tau.closedness", {"11", 1e-6}},
      {"gauge_S.derivative", {"11", 1e-9}},
  };
  return t;
}

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) bad("<root>", "expected a JSON object");
  static const std::set<std::string> known{"spec",  "mode",          "seed",        "theta",      "state",
                                           "times", "base_x",        "path",        "omega_step", "count",
                                           "grid",  "alpha_branch",  "beta_branch", "tolerances", "thresholds",
                                           "output"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) bad(key, "unknown field");
  }
  if (!j.contains("spec") || !j["spec"].is_number_integer() || j["spec"].get<int>() != 1) {
    bad("spec", "schema version must be 1");
  }
  if (!j.contains("mode") || !j["mode"].is_string()) bad("mode", "missing or not a string");
  ScenarioConfig c;
  const std::string mode = j["mode"].get<std::string>();
  bool found = false;
  for (Mode m : all_modes()) {
    if (mode_name(m) == mode) {
      c.mode = m;
      found = true;
    }
  }
  if (!found) bad("mode", "unknown mode '" + mode + "'");
  c.count = default_count(c.mode);
  c.grid = default_grid(c.mode);

  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() || j["seed"].get<std::int64_t>() < 0) bad("seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("theta")) {
    c.theta = j["theta"];
    if (uses_pg_theta(c.mode)) {
      io::theta_pg_from_json(c.theta);
    } else {
      io::theta_go_from_json(c.theta);
    }
  }
  if (j.contains("times")) {
    const json& t = j["times"];
    if (!t.is_object() || !t.contains("t1") || !t.contains("t2")) bad("times", "expected {\"t1\", \"t2\"}");
    c.t1 = io::cx_from_json(t["t1"], "times.t1");
    c.t2 = io::cx_from_json(t["t2"], "times.t2");
    try {
      schlesinger::check_times({c.t1, c.t2, 1.0, 0.0});
    } catch (const NumericError& e) {
      bad("times", e.what());
    }
  }
  if (j.contains("state")) {
    c.state = j["state"];
    if (uses_pg_theta(c.mode)) {
      io::pg_from_json(*c.state);
    } else {
      io::schlesinger_from_json(*c.state);
    }
  }
  if (j.contains("base_x")) c.base_x = io::cx_from_json(j["base_x"], "base_x");
  if (j.contains("omega_step")) c.omega_step = io::cx_from_json(j["omega_step"], "omega_step");
  if (j.contains("path")) {
    const json& p = j["path"];
    if (!p.is_array() || p.size() < 2) bad("path", "expected at least two [t1, t2] waypoints");
    for (const json& w : p) {
      if (!w.is_array() || w.size() != 2) bad("path", "each waypoint is a [t1, t2] pair");
      c.path.push_back({io::cx_from_json(w[0], "path"), io::cx_from_json(w[1], "path")});
    }
  }
  for (const char* key : {"count", "grid"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_number_integer() || j[key].get<std::int64_t>() < 1 || j[key].get<std::int64_t>() > 100000) {
      bad(key, "expected an integer in [1, 100000]");
    }
    (std::string(key) == "count" ? c.count : c.grid) = j[key].get<int>();
  }
  if (j.contains("alpha_branch")) {
    const std::string a = j["alpha_branch"].is_string() ? j["alpha_branch"].get<std::string>() : "";
    if (a != "zero" && a != "neg") bad("alpha_branch", "expected \"zero\" or \"neg\"");
    c.alpha = a == "zero" ? quantize::AlphaBranch::Zero : quantize::AlphaBranch::Neg;
  }
  if (j.contains("beta_branch")) {
    const std::string b = j["beta_branch"].is_string() ? j["beta_branch"].get<std::string>() : "";
    if (b != "small" && b != "large") bad("beta_branch", "expected \"small\" or \"large\"");
    c.beta = b == "small" ? quantize::BetaBranch::Small : quantize::BetaBranch::Large;
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    if (!t.is_object()) bad("tolerances", "expected an object");
    for (const auto& [key, value] : t.items()) {
      if (key == "fd_order") {
        if (!value.is_number_integer() || (value.get<int>() != 2 && value.get<int>() != 4)) {
          bad("tolerances.fd_order", "expected 2 or 4");
        }
        c.tol.fd_order = value.get<int>();
        continue;
      }
      double* dst = key == "rtol" ? &c.tol.rtol : key == "atol" ? &c.tol.atol : key == "fd_step" ? &c.tol.fd_step : nullptr;
      if (!dst) bad("tolerances." + key, "unknown field");
      if (!value.is_number() || !(value.get<double>() > 0.0)) bad("tolerances." + key, "expected a positive number");
      *dst = value.get<double>();
    }
  }
  if (j.contains("thresholds")) {
    const json& t = j["thresholds"];
    if (!t.is_object()) bad("thresholds", "expected an object");
    for (const auto& [key, value] : t.items()) {
      if (!default_thresholds().count(key)) bad("thresholds." + key, "unknown metric");
      if (!value.is_number() || !(value.get<double>() > 0.0)) bad("thresholds." + key, "expected a positive number");
      c.thresholds[key] = value.get<double>();
    }
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) bad("output", "expected a path string");
    c.output = j["output"].get<std::string>();
  }
  return c;
}

json config_to_json(const ScenarioConfig& c) {
  json j{{"spec", 1},
         {"mode", mode_name(c.mode)},
         {"seed", c.seed},
         {"times", {{"t1", io::cx_to_json(c.t1)}, {"t2", io::cx_to_json(c.t2)}}},
         {"base_x", io::cx_to_json(c.base_x)},
         {"omega_step", io::cx_to_json(c.omega_step)},
         {"count", c.count},
         {"grid", c.grid},
         {"alpha_branch", c.alpha == quantize::AlphaBranch::Zero ? "zero" : "neg"},
         {"beta_branch", c.beta == quantize::BetaBranch::Small ? "small" : "large"},
         {"tolerances",
          {{"rtol", c.tol.rtol}, {"atol", c.tol.atol}, {"fd_order", c.tol.fd_order}, {"fd_step", c.tol.fd_step}}}};
  if (!c.theta.is_null()) j["theta"] = c.theta;
  if (c.state) j["state"] = *c.state;
  if (!c.path.empty()) {
    json p = json::array();
    for (const auto& w : c.path) p.push_back(json::array({io::cx_to_json(w[0]), io::cx_to_json(w[1])}));
    j["path"] = p;
  }
  if (!c.thresholds.empty()) j["thresholds"] = c.thresholds;
  if (!c.output.empty()) j["output"] = c.output;
  return j;
}

ScenarioConfig default_config(Mode m) {
  return parse_config(json{{"spec", 1}, {"mode", mode_name(m)}, {"seed", 42}});
}

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

double RunReport::metric(const std::string& name) const {
  for (const auto& m : metrics)
    if (m.name == name) return m.value;
  fail(ErrorKind::ConfigInvalid, "no metric named '" + name + "' in this report");
}

json RunReport::to_json(bool with_timings) const {
  json metrics_j = json::object();
  for (const auto& m : metrics) metrics_j[m.name] = m.value;
  json checks_j = json::array();
  std::map<std::string, bool> verdicts;
  for (const auto& c : checks) {
    checks_j.push_back(
        {{"criterion", c.criterion}, {"metric", c.metric}, {"value", c.value}, {"threshold", c.threshold}, {"pass", c.pass}});
    auto [it, inserted] = verdicts.emplace(c.criterion, c.pass);
    if (!inserted) it->second = it->second && c.pass;
  }
  json verdicts_j = json::object();
  for (const auto& [id, ok] : verdicts) verdicts_j[id] = ok ? "pass" : "fail";
  json residuals_j = json::array();
  for (const auto& r : residuals) residuals_j.push_back(io::report_to_json(r));
  json j{{"spec", 1},
         {"mode", mode_name(config.mode)},
         {"config", config_to_json(config)},
         {"metrics", metrics_j},
         {"checks", checks_j},
         {"criteria", verdicts_j},
         {"residual_reports", residuals_j},
         {"drift", drift},
         {"warnings", warnings},
         {"verdict", passed() ? "pass" : "fail"}};
  if (with_timings) j["timings_seconds"] = seconds;
  return j;
}

std::string RunReport::csv() const {
  std::ostringstream os;
  os << "re_x,im_x,re_y,im_y,equation_id,abs_residual,rel_residual\n";
  for (const auto& r : residuals) {
    for (const auto& p : r.points) {
      os << fmt(p.x.real()) << ',' << fmt(p.x.imag()) << ',' << fmt(p.y.real()) << ',' << fmt(p.y.imag()) << ','
         << r.equation_id << ',' << fmt(p.abs) << ',' << fmt(p.rel) << '\n';
    }
  }
  return os.str();
}

RunReport run_scenario(const ScenarioConfig& config) {
  RunReport r;
  r.config = config;
  Recorder rec(r);
  const auto start = std::chrono::steady_clock::now();
  switch (config.mode) {
    case Mode::Schlesinger: run_schlesinger(config, r, rec); break;
    case Mode::GarnierGO: run_garnier_go(config, r, rec); break;
    case Mode::GarnierPoly: run_garnier_poly(config, r, rec); break;
    case Mode::Bridge: run_bridge(config, r, rec); break;
    case Mode::Bpz: run_bpz(config, r, rec); break;
    case Mode::QuantizeGO: run_quantize_go(config, r, rec); break;
    case Mode::QuantizePG: run_quantize_pg(config, r, rec); break;
    case Mode::PVI: run_pvi(config, r, rec); break;
  }
  r.seconds["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const auto& m : r.metrics) {
    const auto& t = default_thresholds().at(m.name);
    const auto over = config.thresholds.find(m.name);
    const double limit = over == config.thresholds.end() ? t.value : over->second;
    r.checks.push_back({t.criterion, m.name, m.value, limit, std::isfinite(m.value) && m.value <= limit});
  }
  return r;
}

json gen_state(StateKind kind, const ScenarioConfig& config) {
  if (kind == StateKind::SchlesingerB) {
    if (uses_pg_theta(config.mode)) fail(ErrorKind::ConfigInvalid, "a Schlesinger state needs a GO theta block");
    const auto g = schlesinger::random_b_state(go_theta(config), config.t1, config.t2, config.seed);
    json j = io::schlesinger_to_json(g.state);
    j["k_inf_convention"] = "B_inf = diag(k_inf/2, -k_inf/2) with Re k_inf >= 0; from polynomial data k_inf = thinf2 - thinf1";
    return j;
  }
  if (!uses_pg_theta(config.mode)) fail(ErrorKind::ConfigInvalid, "a polynomial Garnier state needs a PG theta block");
  Rng rng(config.seed);
  return io::pg_to_json(random_pg(rng, config, pg_theta(config)));
}

}  // namespace garnier::scenario

namespace garnier::scenario {

std::vector<std::pair<std::string, bool>> VerifyAllReport::criteria() const {
  std::map<std::string, bool> v;
  for (const auto& r : runs) {
    for (const auto& c : r.checks) {
      auto [it, inserted] = v.emplace(c.criterion, c.pass);
      if (!inserted) it->second = it->second && c.pass;
    }
  }
  v["12"] = deterministic;
  std::vector<std::pair<std::string, bool>> out(v.begin(), v.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    const bool na = std::isdigit(static_cast<unsigned char>(a.first[0])), nb = std::isdigit(static_cast<unsigned char>(b.first[0]));
    if (na != nb) return na;
    if (na) return std::stoi(a.first) < std::stoi(b.first);
    return a.first < b.first;
  });
  return out;
}

bool VerifyAllReport::passed() const {
  const auto c = criteria();
  return std::all_of(c.begin(), c.end(), [](const auto& p) { return p.second; });
}

json VerifyAllReport::to_json(bool with_timings) const {
  json runs_j = json::array();
  for (const auto& r : runs) runs_j.push_back(r.to_json(with_timings));
  json verdicts = json::object();
  for (const auto& [id, ok] : criteria()) verdicts[id] = ok ? "pass" : "fail";
  return json{{"spec", 1},
              {"runs", runs_j},
              {"determinism", {{"mode", determinism_mode}, {"identical", deterministic}}},
              {"criteria", verdicts},
              {"verdict", passed() ? "pass" : "fail"}};
}

VerifyAllReport verify_all(const std::function<void(ScenarioConfig&)>& adjust) {
  VerifyAllReport out;
  std::optional<ScenarioConfig> bpz;
  for (Mode m : all_modes()) {
    ScenarioConfig c = default_config(m);
    if (adjust) adjust(c);
    out.runs.push_back(run_scenario(c));
    if (m == Mode::Bpz) bpz = c;
  }
  out.determinism_mode = mode_name(Mode::Bpz);
  const std::string first = out.runs[static_cast<std::size_t>(Mode::Bpz)].to_json().dump();
  out.deterministic = run_scenario(*bpz).to_json().dump() == first;
  return out;
}

}  // namespace garnier::scenario
