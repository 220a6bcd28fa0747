#include "garnier/serialize.hpp"

#include <sstream>

#include "garnier/error.hpp"

namespace garnier::io {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  fail(ErrorKind::ConfigInvalid, "field '" + field + "': " + what);
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where.empty() ? key : where + "." + key, "missing");
  return j.at(key);
}

std::string path(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

}  // namespace

json cx_to_json(Cx z) { return json::array({z.real(), z.imag()}); }

Cx cx_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    bad(field, "expected a number or an [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

json mat_to_json(const Mat2& m) {
  return json::array({json::array({cx_to_json(m.a11), cx_to_json(m.a12)}),
                      json::array({cx_to_json(m.a21), cx_to_json(m.a22)})});
}

Mat2 mat_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 || !j[1].is_array() ||
      j[1].size() != 2) {
    bad(field, "expected a 2x2 nested array");
  }
  return {cx_from_json(j[0][0], field), cx_from_json(j[0][1], field), cx_from_json(j[1][0], field),
          cx_from_json(j[1][1], field)};
}

json theta_go_to_json(const schlesinger::ThetaGO& th) {
  json t = json::array();
  for (const Cx v : th.theta) t.push_back(cx_to_json(v));
  return {{"theta", t}, {"k_inf", cx_to_json(th.k_inf)}, {"jordan", th.jordan}};
}

schlesinger::ThetaGO theta_go_from_json(const json& j) {
  const json& t = member(j, "theta", "theta");
  if (!t.is_array() || t.size() != 4) bad("theta.theta", "expected four exponents");
  schlesinger::ThetaGO th;
  for (std::size_t i = 0; i < 4; ++i) th.theta[i] = cx_from_json(t[i], "theta.theta");
  th.k_inf = j.contains("k_inf") ? cx_from_json(j.at("k_inf"), "theta.k_inf") : Cx(0.0);
  th.jordan = j.value("jordan", false);
  return th;
}

json schlesinger_to_json(const schlesinger::SchlesingerState& s) {
  json m = json::array();
  for (const Mat2& a : s.A) m.push_back(mat_to_json(a));
  return {{"t1", cx_to_json(s.t1)},
          {"t2", cx_to_json(s.t2)},
          {"matrices", m},
          {"norm", s.norm == schlesinger::Norm::B ? "B" : "Q"},
          {"theta", theta_go_to_json(s.theta)}};
}

schlesinger::SchlesingerState schlesinger_from_json(const json& j) {
  schlesinger::SchlesingerState s;
  s.t1 = cx_from_json(member(j, "t1", "state"), "state.t1");
  s.t2 = cx_from_json(member(j, "t2", "state"), "state.t2");
  const json& m = member(j, "matrices", "state");
  if (!m.is_array() || m.size() != 4) bad("state.matrices", "expected four 2x2 matrices");
  for (std::size_t i = 0; i < 4; ++i) s.A[i] = mat_from_json(m[i], "state.matrices");
  const std::string norm = j.value("norm", "B");
  if (norm != "B" && norm != "Q") bad("state.norm", "expected \"B\" or \"Q\"");
  s.norm = norm == "B" ? schlesinger::Norm::B : schlesinger::Norm::Q;
  s.theta = theta_go_from_json(member(j, "theta", "state"));
  schlesinger::check_times(s.times());
  const auto B = schlesinger::b_residues(s);
  for (int i = 0; i < 4; ++i) {
    const double scale = std::max(1.0, B[i].max_abs() * B[i].max_abs());
    if (std::abs(B[i].trace()) > 1e-9 * std::sqrt(scale) ||
        std::abs(B[i].det() + s.theta.delta(i)) > 1e-9 * scale) {
      std::ostringstream os;
      os << "residue " << (i + 1) << " does not match its exponent";
      bad("state.matrices", os.str());
    }
  }
  return s;
}

json go_to_json(const okamoto::GOState& g) {
  return {{"t1", cx_to_json(g.t1)},
          {"t2", cx_to_json(g.t2)},
          {"lambda", json::array({cx_to_json(g.lambda[0]), cx_to_json(g.lambda[1])})},
          {"mu", json::array({cx_to_json(g.mu[0]), cx_to_json(g.mu[1])})},
          {"theta", theta_go_to_json(g.params)},
          {"kappa", cx_to_json(g.params.kappa())}};
}

json theta_pg_to_json(const polynomial::ThetaPG& th) {
  return {{"th0", cx_to_json(th.th0)},     {"th1", cx_to_json(th.th1)},       {"tht1", cx_to_json(th.tht1)},
          {"tht2", cx_to_json(th.tht2)},   {"thinf1", cx_to_json(th.thinf1)}, {"thinf2", cx_to_json(th.thinf2)}};
}

polynomial::ThetaPG theta_pg_from_json(const json& j) {
  auto get = [&](const char* k) { return cx_from_json(member(j, k, "theta"), path("theta", k)); };
  polynomial::ThetaPG th{get("th0"), get("th1"), get("tht1"), get("tht2"), get("thinf1"), 0.0};
  if (!j.contains("thinf2")) return polynomial::ThetaPG::with_fuchs(th.th0, th.th1, th.tht1, th.tht2, th.thinf1);
  th.thinf2 = get("thinf2");
  if (std::abs(th.fuchs_defect()) > 1e-12) bad("theta", "exponents violate the Fuchs relation");
  return th;
}

json pg_to_json(const polynomial::PGState& s) {
  return {{"t1", cx_to_json(s.t1)},
          {"t2", cx_to_json(s.t2)},
          {"q", json::array({cx_to_json(s.q[0]), cx_to_json(s.q[1])})},
          {"p", json::array({cx_to_json(s.p[0]), cx_to_json(s.p[1])})},
          {"theta", theta_pg_to_json(s.params)}};
}

polynomial::PGState pg_from_json(const json& j) {
  polynomial::PGState s;
  s.t1 = cx_from_json(member(j, "t1", "state"), "state.t1");
  s.t2 = cx_from_json(member(j, "t2", "state"), "state.t2");
  for (const char* key : {"q", "p"}) {
    const json& v = member(j, key, "state");
    if (!v.is_array() || v.size() != 2) bad(path("state", key), "expected two entries");
    auto& dst = key[0] == 'q' ? s.q : s.p;
    dst = {cx_from_json(v[0], path("state", key)), cx_from_json(v[1], path("state", key))};
  }
  s.params = theta_pg_from_json(member(j, "theta", "state"));
  polynomial::check_pg_times(s.t1, s.t2);
  return s;
}

json fd_to_json(const FDScheme& fd) {
  return {{"order", fd.order}, {"step", fd.step}, {"richardson", fd.richardson}, {"relative_step", fd.relative_step}};
}

json report_to_json(const quantize::ResidualReport& r) {
  return {{"equation_id", r.equation_id}, {"points", r.points.size()}, {"max_abs_residual", r.max_abs},
          {"max_rel_residual", r.max_rel}, {"normalization", r.normalization}, {"fd_scheme", fd_to_json(r.fd)}};
}

}  // namespace garnier::io
