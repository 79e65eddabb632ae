#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bloch2d/analytic.hpp"
#include "bloch2d/model.hpp"

namespace bloch2d {

/// Malformed JSON. The message carries the line and column.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Every violation found in a syntactically valid config, each prefixed with
/// its JSON path (e.g. "$.state.sigma: must be positive").
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

enum class ScenarioKind { lissajous, drift, dispersion, periodicity, oracle_check };

std::string to_string(ScenarioKind kind);

struct ProfileConfig {
  // "linear": F (1 + slope t); "harmonic": F (1 + amplitude cos(frequency t));
  // "steps": F * values[i] on [times[i], times[i+1]).
  std::string kind;
  double slope = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;
  std::vector<double> times;
  std::vector<double> values;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::lissajous;
  double hbar = 0.0;
  // Band widths (Delta_1, Delta_2, Delta_3), or an explicit map of g values
  // (frequency units) listing one member of each (u,v), (-u,-v) pair.
  std::optional<std::array<double, 3>> deltas;
  std::map<Shift, double> g;
  double F = 0.0;                    // force magnitude
  int q = 1;
  int r = 0;
  std::optional<ProfileConfig> profile;
  GaussianSpec state;
  std::optional<double> periods;  // grid end in Bloch periods
  std::optional<double> t_end;    // grid end in time units
  int samples = 0;
  int L = 0;
  std::string trajectory_file;
  std::string summary_file;
  bool analytic = true;
  bool numeric = true;
  std::uint64_t seed = 0;

  CouplingSet couplings() const;
  FieldSpec field() const;
  LatticeWindow window() const { return LatticeWindow(L); }
  LatticeState initial_state() const;
  double grid_end() const;
  std::vector<double> grid() const;
};

/// Parses and validates a config document; collects every violation.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig validate_config(const std::filesystem::path& path);

/// Arithmetic with + - * / ( ) and the constant pi, for values such as
/// "2.81/(2*pi)" or "-pi/2". Throws InvalidArgument.
double evaluate_expression(const std::string& text);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool check = false;
  int threads = 1;
};

struct GateResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed = false;
};

struct RunResult {
  std::vector<GateResult> gates;
  std::filesystem::path trajectory_path;
  std::filesystem::path summary_path;
  bool all_passed() const;
};

/// Runs the scenario and writes the trajectory CSV and the summary JSON.
/// Runtime failures (BoundaryOverflow, QuadratureFailure) propagate.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options,
                       const WarningSink& sink = {});

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitRuntimeError = 3;

}  // namespace bloch2d
