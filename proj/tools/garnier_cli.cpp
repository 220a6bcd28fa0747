#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "garnier/error.hpp"
#include "garnier/scenario.hpp"

namespace {

using garnier::scenario::json;
namespace sc = garnier::scenario;

enum Exit { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNumericError = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool csv = false;
  std::optional<double> rtol, fd_step;
  bool timings = false;
  std::string kind = "schlesinger-B";
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) garnier::fail(garnier::ErrorKind::ConfigInvalid, "field 'config': cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    garnier::fail(garnier::ErrorKind::ConfigInvalid, std::string("field 'config': ") + e.what());
  }
}

void apply_overrides(sc::ScenarioConfig& c, const Options& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.rtol) {
    if (!(*o.rtol > 0.0)) garnier::fail(garnier::ErrorKind::ConfigInvalid, "field 'rtol': expected a positive number");
    c.tol.rtol = *o.rtol;
  }
  if (o.fd_step) {
    if (!(*o.fd_step > 0.0)) garnier::fail(garnier::ErrorKind::ConfigInvalid, "field 'fd_step': expected a positive number");
    c.tol.fd_step = *o.fd_step;
  }
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) garnier::fail(garnier::ErrorKind::ConfigInvalid, "field 'out': cannot write '" + path + "'");
  out << text << '\n';
}

std::string csv_path(const std::string& out) {
  if (out.empty()) return "residuals.csv";
  const auto dot = out.rfind('.');
  return (dot == std::string::npos ? out : out.substr(0, dot)) + ".csv";
}

int cmd_gen(const Options& o) {
  sc::ScenarioConfig c;
  if (!o.config.empty()) c = sc::parse_config(read_json(o.config));
  const bool pg = o.kind == "pg";
  if (o.config.empty()) c = sc::default_config(pg ? sc::Mode::GarnierPoly : sc::Mode::Schlesinger);
  apply_overrides(c, o);
  emit(sc::gen_state(pg ? sc::StateKind::PG : sc::StateKind::SchlesingerB, c).dump(2), o.out);
  return kPass;
}

int cmd_run(const Options& o) {
  if (o.config.empty()) garnier::fail(garnier::ErrorKind::ConfigInvalid, "field 'config': --config is required");
  auto c = sc::parse_config(read_json(o.config));
  apply_overrides(c, o);
  const std::string out = o.out.empty() ? c.output : o.out;
  const auto report = sc::run_scenario(c);
  emit(report.to_json(o.timings).dump(2), out);
  if (o.csv) {
    std::ofstream f(csv_path(out));
    f << report.csv();
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& ch : report.checks) {
    std::cerr << (ch.pass ? "PASS " : "FAIL ") << ch.criterion << ' ' << ch.metric << " = " << ch.value
              << " (threshold " << ch.threshold << ")\n";
  }
  return report.passed() ? kPass : kCheckFailure;
}

int cmd_verify_all(const Options& o) {
  const auto report = sc::verify_all([&](sc::ScenarioConfig& c) { apply_overrides(c, o); });
  emit(report.to_json(o.timings).dump(2), o.out);
  for (const auto& [id, ok] : report.criteria()) std::cerr << (ok ? "PASS " : "FAIL ") << "criterion " << id << '\n';
  return report.passed() ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Isomonodromic deformation and Garnier system toolkit"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", o.seed, "Seed override");
    cmd->add_option("--out", o.out, "Output file (stdout when omitted)");
    cmd->add_option("--rtol", o.rtol, "ODE relative tolerance override");
    cmd->add_option("--fd-step", o.fd_step, "Finite-difference step override");
  };
  auto* gen = app.add_subcommand("gen", "Emit a seeded constraint-satisfying state");
  gen->add_option("--kind", o.kind, "State kind")->check(CLI::IsMember({"schlesinger-B", "pg"}));
  gen->add_option("--config", o.config, "Config supplying theta and times");
  common(gen);
  auto* run = app.add_subcommand("run", "Run one scenario and write its report");
  run->add_option("--config", o.config, "Scenario config (JSON)");
  run->add_flag("--csv", o.csv, "Also write per-point residuals as CSV next to the report");
  run->add_flag("--timings", o.timings, "Include wall-clock per stage in the report");
  common(run);
  auto* all = app.add_subcommand("verify-all", "Run every acceptance scenario");
  all->add_flag("--timings", o.timings, "Include wall-clock per stage in the report");
  common(all);
  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(o);
    if (run->parsed()) return cmd_run(o);
    return cmd_verify_all(o);
  } catch (const garnier::NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    const auto k = e.kind();
    return k == garnier::ErrorKind::ConfigInvalid || k == garnier::ErrorKind::NotOnReduction ? kConfigError
                                                                                              : kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericError;
  }
}
