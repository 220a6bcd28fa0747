#include "doctest.h"
#include <functional>
#include "garnier/error.hpp"
#include "garnier/serialize.hpp"

using namespace garnier;
using nlohmann::json;

namespace {

template <class F>
ErrorKind error_of(F&& f) {
  try {
    f();
  } catch (const NumericError& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::ConfigInvalid;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const NumericError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("complex values are [re, im] pairs") {
  const Cx z(0.1, -3.25);
  CHECK(io::cx_to_json(z) == json::array({0.1, -3.25}));
  CHECK(io::cx_from_json(io::cx_to_json(z), "z") == z);
  CHECK(io::cx_from_json(json(2.5), "z") == Cx(2.5, 0.0));
  CHECK(error_of([] { io::cx_from_json(json::array({1.0}), "z"); }) == ErrorKind::ConfigInvalid);
  CHECK(error_of([] { io::cx_from_json(json("1+2i"), "z"); }) == ErrorKind::ConfigInvalid);
  CHECK(message_of([] { io::cx_from_json(json::object(), "times.t1"); }).find("times.t1") != std::string::npos);
}

TEST_CASE("Schlesinger states survive a roundtrip bit for bit") {
  const auto g = schlesinger::random_b_state({Cx(0.3, 0.1), Cx(0.45, -0.2), Cx(0.27, 0.05), Cx(0.61, 0.13)},
                                             Cx(2.2, 0.6), Cx(-1.1, 0.9), 7);
  const json j = io::schlesinger_to_json(g.state);
  const auto back = io::schlesinger_from_json(j);
  CHECK(back.t1 == g.state.t1);
  CHECK(back.t2 == g.state.t2);
  for (int i = 0; i < 4; ++i) CHECK(max_abs_diff(back.A[i], g.state.A[i]) == 0.0);
  CHECK(io::schlesinger_to_json(back).dump() == j.dump());
}

TEST_CASE("Schlesinger loader rejects residues off their conjugacy class") {
  const auto g = schlesinger::random_b_state({Cx(0.3, 0.1), Cx(0.45, -0.2), Cx(0.27, 0.05), Cx(0.61, 0.13)},
                                             Cx(2.2, 0.6), Cx(-1.1, 0.9), 7);
  json j = io::schlesinger_to_json(g.state);
  json& re = j["matrices"][2][0][0][0];
  re = re.get<double>() + 1e-6;
  CHECK(error_of([&] { io::schlesinger_from_json(j); }) == ErrorKind::ConfigInvalid);
}

TEST_CASE("PG theta completes or enforces the Fuchs relation") {
  const auto th = polynomial::ThetaPG::with_fuchs(Cx(0.3, 0.1), Cx(0.45, -0.2), Cx(0.27, 0.05), Cx(0.61, 0.13),
                                                  Cx(-0.8, 0.3));
  json j = io::theta_pg_to_json(th);
  CHECK(std::abs(io::theta_pg_from_json(j).fuchs_defect()) <= 1e-15);
  j.erase("thinf2");
  CHECK(std::abs(io::theta_pg_from_json(j).thinf2 - th.thinf2) <= 1e-15);
  j["thinf2"] = json::array({0.0, 0.0});
  CHECK(error_of([&] { io::theta_pg_from_json(j); }) == ErrorKind::ConfigInvalid);
}

TEST_CASE("PG states roundtrip") {
  polynomial::PGState s;
  s.t1 = Cx(2.2, 0.6);
  s.t2 = Cx(-1.1, 0.9);
  s.q = {Cx(0.3, 0.4), Cx(-0.2, 0.5)};
  s.p = {Cx(0.1, -0.7), Cx(1.3, 0.2)};
  s.params = polynomial::ThetaPG::with_fuchs(0.1, 0.2, 0.3, 0.4, 0.5);
  const auto back = io::pg_from_json(io::pg_to_json(s));
  CHECK(back.q == s.q);
  CHECK(back.p == s.p);
  CHECK(back.t1 == s.t1);
  CHECK(back.params.thinf2 == s.params.thinf2);
}
