#include "doctest.h"
#include "garnier/error.hpp"
#include "garnier/scenario.hpp"

using namespace garnier;
using namespace garnier::scenario;

namespace {

json base(const std::string& mode) { return json{{"spec", 1}, {"mode", mode}, {"seed", 3}}; }

std::string config_error(const json& j) {
  try {
    parse_config(j);
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    return e.what();
  }
  FAIL("config was accepted");
  return "";
}

bool mentions(const std::string& msg, const std::string& field) {
  return msg.find("'" + field + "'") != std::string::npos;
}

}  // namespace

TEST_CASE("config validation names the offending field") {
  CHECK(mentions(config_error(json{{"mode", "bpz"}}), "spec"));
  CHECK(mentions(config_error(json{{"spec", 2}, {"mode", "bpz"}}), "spec"));
  CHECK(mentions(config_error(base("nonsense")), "mode"));
  auto j = base("bpz");
  j["colour"] = "blue";
  CHECK(mentions(config_error(j), "colour"));
  j = base("bpz");
  j["seed"] = -1;
  CHECK(mentions(config_error(j), "seed"));
  j = base("bpz");
  j["tolerances"] = {{"fd_order", 3}};
  CHECK(mentions(config_error(j), "tolerances.fd_order"));
  j = base("bpz");
  j["tolerances"] = {{"rtol", 0.0}};
  CHECK(mentions(config_error(j), "tolerances.rtol"));
  j = base("bpz");
  j["thresholds"] = {{"no.such.metric", 1.0}};
  CHECK(mentions(config_error(j), "thresholds.no.such.metric"));
  j = base("bpz");
  j["times"] = {{"t1", {1.0, 0.0}}, {"t2", {-1.0, 0.5}}};
  CHECK(mentions(config_error(j), "times"));
  j = base("garnier-poly");
  j["theta"] = {{"th0", {0.1, 0}}, {"th1", {0.2, 0}}, {"tht1", {0.3, 0}}, {"tht2", {0.4, 0}},
                {"thinf1", {0.5, 0}}, {"thinf2", {0.5, 0}}};
  config_error(j);
}

TEST_CASE("config echo reparses to the same config") {
  auto j = base("quantize-pg");
  j["grid"] = 7;
  j["beta_branch"] = "large";
  j["tolerances"] = {{"fd_step", 2e-3}};
  const auto c = parse_config(j);
  CHECK(config_to_json(parse_config(config_to_json(c))).dump() == config_to_json(c).dump());
  CHECK(c.grid == 7);
  CHECK(c.beta == quantize::BetaBranch::Large);
  CHECK(c.tol.fd_step == 2e-3);
}

TEST_CASE("zero residues do not move and pass every check") {
  json state{{"t1", {2.2, 0.6}},
             {"t2", {-1.1, 0.9}},
             {"norm", "B"},
             {"theta", {{"theta", json::array({{0, 0}, {0, 0}, {0, 0}, {0, 0}})}, {"k_inf", {0, 0}}, {"jordan", false}}},
             {"matrices", json::array()}};
  for (int i = 0; i < 4; ++i) state["matrices"].push_back(io::mat_to_json(Mat2::zero()));
  auto j = base("schlesinger");
  j["state"] = state;
  const auto r = run_scenario(parse_config(j));
  REQUIRE(r.drift.size() == 1);
  CHECK(r.drift[0] == 0.0);
  CHECK(r.passed());
}

TEST_CASE("pvi refuses parameters off the reduction before integrating") {
  auto j = base("pvi");
  j["theta"] = {{"th0", {0.3, 0.1}}, {"th1", {0.45, -0.2}}, {"tht1", {0.27, 0.05}}, {"tht2", {0.61, 0.13}},
                {"thinf1", {-0.8, 0.3}}};
  try {
    run_scenario(parse_config(j));
    FAIL("expected NotOnReduction");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::NotOnReduction);
  }
}

TEST_CASE("equal configs give byte-identical reports") {
  auto j = base("bpz");
  j["seed"] = 42;
  j["count"] = 2;
  j["grid"] = 6;
  const auto c = parse_config(j);
  const std::string a = run_scenario(c).to_json().dump(), b = run_scenario(c).to_json().dump();
  CHECK(a == b);
  j["seed"] = 43;
  CHECK(run_scenario(parse_config(j)).to_json().dump() != a);
}

TEST_CASE("verdicts follow recorded numbers and thresholds") {
  auto j = base("bridge");
  j["count"] = 3;
  const auto pass = run_scenario(parse_config(j));
  CHECK(pass.passed());
  j["thresholds"] = {{"bridge.roundtrip", 1e-300}};
  const auto strict = run_scenario(parse_config(j));
  CHECK(strict.metric("bridge.roundtrip") == pass.metric("bridge.roundtrip"));
  CHECK(strict.passed() == (pass.metric("bridge.roundtrip") <= 1e-300));
  for (const auto& c : strict.checks) CHECK(c.pass == (c.value <= c.threshold));
  CHECK_THROWS_AS(pass.metric("missing"), NumericError);
}

TEST_CASE("csv dump has one row per point and equation") {
  auto j = base("quantize-go");
  j["count"] = 1;
  j["grid"] = 4;
  const auto r = run_scenario(parse_config(j));
  const std::string csv = r.csv();
  CHECK(csv.rfind("re_x,im_x,re_y,im_y,equation_id,abs_residual,rel_residual\n", 0) == 0);
  std::size_t rows = 0;
  for (char ch : csv) rows += ch == '\n';
  CHECK(rows == 1 + 2 * 4);
}

TEST_CASE("generated Schlesinger states sit on their conjugacy classes") {
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    auto j = base("schlesinger");
    j["seed"] = seed;
    const auto c = parse_config(j);
    const json s = gen_state(StateKind::SchlesingerB, c);
    CHECK(s.dump() == gen_state(StateKind::SchlesingerB, c).dump());
    const auto st = io::schlesinger_from_json(s);
    for (int i = 0; i < 4; ++i) {
      const Cx th = st.theta.theta[i];
      CHECK(std::abs(st.A[i].trace()) <= 1e-14);
      CHECK(std::abs(st.A[i].det() + th * th / 4.0) <= 1e-14);
    }
    Mat2 inf = Mat2::zero();
    for (const auto& a : st.A) inf = inf + a;
    CHECK(std::abs(inf.a12) + std::abs(inf.a21) <= 1e-13);
  }
}

TEST_CASE("generated PG states satisfy Fuchs and need a PG theta") {
  const auto c = parse_config(base("garnier-poly"));
  const auto s = io::pg_from_json(gen_state(StateKind::PG, c));
  CHECK(std::abs(s.params.fuchs_defect()) <= 1e-14);
  CHECK_THROWS_AS(gen_state(StateKind::PG, parse_config(base("bpz"))), NumericError);
  CHECK_THROWS_AS(gen_state(StateKind::SchlesingerB, c), NumericError);
}

TEST_CASE("pipeline errors carry their stage") {
  auto j = base("garnier-poly");
  j["count"] = 2;
  j["theta"] = {{"th0", {0.3, 0.1}}, {"th1", {0.45, -0.2}}, {"tht1", {0.27, 0.05}}, {"tht2", {0.61, 0.13}},
                {"thinf1", {-0.815, -0.04}}};
  try {
    run_scenario(parse_config(j));
    FAIL("expected ResonantInfinity");
  } catch (const NumericError& e) {
    CHECK(e.kind() == ErrorKind::ResonantInfinity);
    CHECK(std::string(e.what()).find("stage 'linearization'") != std::string::npos);
  }
}

TEST_CASE("integer exponents only warn") {
  auto j = base("garnier-go");
  j["count"] = 1;
  j["grid"] = 3;
  j["theta"] = {{"theta", json::array({{1.0, 0.0}, {0.45, -0.2}, {0.27, 0.05}, {0.61, 0.13}})}};
  const auto r = run_scenario(parse_config(j));
  CHECK(r.warnings.size() == 1);
  CHECK(r.to_json()["warnings"].size() == 1);
  CHECK(run_scenario(parse_config(base("garnier-go"))).warnings.empty());
}
