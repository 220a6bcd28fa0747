#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "garnier/quantize.hpp"
#include "garnier/serialize.hpp"

namespace garnier::scenario {

using nlohmann::json;

enum class Mode { Schlesinger, GarnierGO, GarnierPoly, Bridge, Bpz, QuantizeGO, QuantizePG, PVI };

std::string mode_name(Mode m);
const std::vector<Mode>& all_modes();

struct Tolerances {
  double rtol = 1e-12;
  double atol = 1e-14;
  int fd_order = 4;
  double fd_step = 1e-3;

  OdeOptions ode() const;
  FDScheme fd() const;
};

struct ScenarioConfig {
  Mode mode = Mode::Schlesinger;
  std::uint64_t seed = 1;
  /// Raw theta block; its shape depends on the mode (GO or PG names).
  json theta;
  std::optional<json> state;
  Cx t1{2.2, 0.6}, t2{-1.1, 0.9};
  Cx base_x{0.5, -1.2};
  /// Waypoints in (t1, t2); empty means a straight leg of length 1.
  std::vector<std::array<Cx, 2>> path;
  /// Increment of omega along the reduced segment.
  Cx omega_step{0.3, 0.4};
  int count = 0;
  int grid = 0;
  quantize::AlphaBranch alpha = quantize::AlphaBranch::Zero;
  quantize::BetaBranch beta = quantize::BetaBranch::Small;
  Tolerances tol;
  std::map<std::string, double> thresholds;
  std::string output;
};

/// Validates a config document; throws ConfigInvalid naming the offending field.
ScenarioConfig parse_config(const json& j);
json config_to_json(const ScenarioConfig& c);

/// The fixture each acceptance criterion runs on.
ScenarioConfig default_config(Mode m);

struct Metric {
  std::string name;
  double value = 0.0;
};

struct Check {
  std::string criterion;
  std::string metric;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunReport {
  ScenarioConfig config;
  std::vector<Metric> metrics;
  std::vector<Check> checks;
  std::vector<quantize::ResidualReport> residuals;
  /// Per-state invariant drift, when the mode integrates Schlesinger states.
  std::vector<double> drift;
  /// Non-fatal notes, e.g. integer local exponents; they never affect verdicts.
  std::vector<std::string> warnings;
  std::map<std::string, double> seconds;

  bool passed() const;
  /// Throws ConfigInvalid for an unknown metric name.
  double metric(const std::string& name) const;
  /// Timings are left out unless asked for, so equal inputs give equal bytes.
  json to_json(bool with_timings = false) const;
  /// Per-point residuals with columns re_x, im_x, re_y, im_y, equation_id, abs_residual, rel_residual.
  std::string csv() const;
};

/// Default thresholds: metric name -> (criterion id, threshold).
struct Threshold {
  std::string criterion;
  double value;
};
const std::map<std::string, Threshold>& default_thresholds();

/// Runs the mode's pipeline. Deterministic for a given config.
RunReport run_scenario(const ScenarioConfig& config);

enum class StateKind { SchlesingerB, PG };

/// Seeded constraint-satisfying state as JSON; theta and times come from the config.
json gen_state(StateKind kind, const ScenarioConfig& config);

struct VerifyAllReport {
  std::vector<RunReport> runs;
  /// Byte comparison of two reports produced from the same config.
  bool deterministic = false;
  std::string determinism_mode;

  /// Verdict per criterion id, in numeric order, "garx" last.
  std::vector<std::pair<std::string, bool>> criteria() const;
  bool passed() const;
  json to_json(bool with_timings = false) const;
};

/// Runs the default fixture of every mode, then repeats one mode to check
/// determinism. adjust may override seed or tolerances on each config.
VerifyAllReport verify_all(const std::function<void(ScenarioConfig&)>& adjust = {});

}  // namespace garnier::scenario
