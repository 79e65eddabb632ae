#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bloch2d/scenario.hpp"

namespace {

int threads_from_env() {
  const char* v = std::getenv("BLOCH2D_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    std::cerr << "warning: ignoring BLOCH2D_THREADS='" << v << "' (expected a positive integer)\n";
    return 1;
  }
  return static_cast<int>(n);
}

void report_config_error(const bloch2d::Error& e) {
  if (const auto* v = dynamic_cast<const bloch2d::ValidationError*>(&e)) {
    std::cerr << "config has " << v->violations().size() << " problem(s):\n";
    for (const auto& line : v->violations()) std::cerr << "  " << line << "\n";
  } else {
    std::cerr << "error: " << e.what() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D Bloch oscillation scenarios: analytic closed forms against exact propagation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  bool check = false;
  auto* run = app.add_subcommand("run", "run a scenario and write trajectory CSV and summary JSON");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_flag("--check", check, "exit 1 when an acceptance gate fails");
  run->add_option("--out", out_dir, "output directory");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a scenario config and list every problem");
  validate->add_option("config", validate_path, "scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bloch2d::kExitConfigError;
  }

  if (*validate) {
    try {
      const auto cfg = bloch2d::validate_config(validate_path);
      std::cout << "ok: scenario " << bloch2d::to_string(cfg.scenario) << ", L=" << cfg.L
                << ", samples=" << cfg.samples << "\n";
      return bloch2d::kExitOk;
    } catch (const bloch2d::Error& e) {
      report_config_error(e);
      return bloch2d::kExitConfigError;
    }
  }

  bloch2d::ScenarioConfig cfg;
  try {
    cfg = bloch2d::validate_config(config_path);
  } catch (const bloch2d::Error& e) {
    report_config_error(e);
    return bloch2d::kExitConfigError;
  }

  try {
    bloch2d::RunOptions opts{out_dir, check, threads_from_env()};
    const auto result = bloch2d::run_scenario(cfg, opts);
    for (const auto& g : result.gates) {
      std::printf("%-28s %-4s value=%.6g limit=%.3g\n", g.name.c_str(), g.passed ? "PASS" : "FAIL",
                  g.value, g.limit);
    }
    std::printf("wrote %s\nwrote %s\n", result.trajectory_path.c_str(), result.summary_path.c_str());
    if (check && !result.all_passed()) return bloch2d::kExitCheckFailed;
    return bloch2d::kExitOk;
  } catch (const bloch2d::Error& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return bloch2d::kExitRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return bloch2d::kExitRuntimeError;
  }
}
