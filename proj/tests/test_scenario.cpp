#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "bloch2d/scenario.hpp"

using namespace bloch2d;
namespace fs = std::filesystem;

namespace {

std::string read(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bloch2d_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const char* kSmall = R"({
  "schema": 1,
  "scenario": "periodicity",
  "model": { "hbar": 1.0, "delta1": 0.25, "delta2": 0.3, "delta3": 0.02 },
  "field": { "F": 0.4, "q": 1, "r": 1 },
  "state": { "sigma": 3, "k1": 0.3, "k2": "-pi/3" },
  "grid": { "periods": 2, "samples": 41 },
  "window": { "L": 64 },
  "outputs": { "trajectory": "small.csv", "summary": "small.json" }
})";

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("expression values") {
  CHECK(evaluate_expression("2.81/(2*pi)") == doctest::Approx(2.81 / (2 * std::numbers::pi)));
  CHECK(evaluate_expression("-pi/2") == doctest::Approx(-std::numbers::pi / 2));
  CHECK(evaluate_expression(" 3 - 2*(1+1) ") == doctest::Approx(-1.0));
  CHECK(evaluate_expression("1e-3") == doctest::Approx(1e-3));
  CHECK_THROWS_AS(evaluate_expression("2*"), InvalidArgument);
  CHECK_THROWS_AS(evaluate_expression("(1"), InvalidArgument);
  CHECK_THROWS_AS(evaluate_expression("tau"), InvalidArgument);
}

TEST_CASE("shipped default config parses with the reference parameters") {
  const auto cfg = validate_config(fs::path(BLOCH2D_SOURCE_DIR) / "configs" / "reference.json");
  REQUIRE(cfg.deltas.has_value());
  CHECK((*cfg.deltas)[2] == 0.008);
  CHECK(cfg.hbar == doctest::Approx(2.81 / (2 * std::numbers::pi)));
  CHECK(cfg.F == 0.1);
  CHECK(cfg.L == 512);
  CHECK(cfg.samples == 600);
  CHECK(cfg.scenario == ScenarioKind::lissajous);
  CHECK(cfg.couplings().g({1, -1}) == doctest::Approx(4.472e-3).epsilon(1e-3));
}

TEST_CASE("every shipped config validates") {
  for (const auto& entry : fs::directory_iterator(fs::path(BLOCH2D_SOURCE_DIR) / "configs")) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(validate_config(entry.path()));
  }
}

TEST_CASE("validation collects every violation with its path") {
  auto j = nlohmann::json::parse(kSmall);
  j["state"]["sigma"] = -1.0;
  j["field"]["q"] = 2;
  j["field"]["r"] = 4;
  j["grid"]["bogus"] = 1;
  j["colour"] = "blue";
  const auto v = violations_of(j.dump());
  CHECK(v.size() >= 4);
  CHECK(mentions(v, "$.state.sigma: must be positive"));
  CHECK(mentions(v, "gcd = 2"));
  CHECK(mentions(v, "$.grid.bogus: unknown key"));
  CHECK(mentions(v, "$.colour: unknown key"));
}

TEST_CASE("validation of individual sections") {
  auto with = [](auto edit) {
    auto j = nlohmann::json::parse(kSmall);
    edit(j);
    return violations_of(j.dump());
  };
  CHECK(mentions(with([](auto& j) { j["schema"] = 2; }), "$.schema"));
  CHECK(mentions(with([](auto& j) { j["scenario"] = "spiral"; }), "unknown scenario"));
  CHECK(mentions(with([](auto& j) { j["window"]["L"] = 7; }), "$.window.L"));
  CHECK(mentions(with([](auto& j) { j["window"]["L"] = 16; }), "$.state"));
  CHECK(mentions(with([](auto& j) { j["grid"]["t_end"] = 3.0; }), "exactly one of periods and t_end"));
  CHECK(mentions(with([](auto& j) { j["model"]["couplings"] = nlohmann::json::array(); }),
                 "either delta1/delta2/delta3 or a couplings list"));
  CHECK(mentions(with([](auto& j) { j["state"]["k1"] = "pi*"; }), "$.state.k1"));
  CHECK(mentions(with([](auto& j) { j["outputs"]["summary"] = "../x.json"; }), "directories"));
  CHECK(mentions(with([](auto& j) { j["scenario"] = "oracle-check"; }), "L <= 16"));
  CHECK(mentions(with([](auto& j) {
                   j["field"]["profile"] = {{"kind", "linear"}, {"slope", 0.1}};
                 }),
                 "needs a constant field"));
  CHECK(with([](auto& j) { j["seed"] = 4; }).empty());
  CHECK_THROWS_AS(parse_config("{ \"schema\": 1, "), ParseError);
  try {
    parse_config("{\n  \"schema\": 1,\n  oops\n}");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("explicit coupling lists and cartesian field components") {
  auto j = nlohmann::json::parse(kSmall);
  j["model"] = {{"hbar", 1.0},
                {"couplings", {{{"u", 1}, {"v", 0}, {"g", 0.05}}, {{"u", 0}, {"v", 1}, {"g", 0.04}}}}};
  j["field"] = {{"F1", 0.2}, {"F2", -0.1}};
  const auto cfg = parse_config(j.dump());
  CHECK(cfg.q == 2);
  CHECK(cfg.r == -1);
  CHECK(cfg.F == doctest::Approx(std::hypot(0.2, 0.1)));
  CHECK(cfg.couplings().g({-1, 0}) == 0.05);
  CHECK(cfg.couplings().g({1, 1}) == 0.0);
}

TEST_CASE("scenario outputs are deterministic") {
  const auto cfg = parse_config(kSmall);
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const auto ra = run_scenario(cfg, {a, true, 1});
  const auto rb = run_scenario(cfg, {b, true, 2});
  CHECK(ra.all_passed());
  CHECK(read(ra.trajectory_path) == read(rb.trajectory_path));
  CHECK(read(ra.summary_path) == read(rb.summary_path));

  const std::string csv = read(ra.trajectory_path);
  CHECK(csv.rfind("t,n1,n2,n1sq,n2sq,var1,var2,source\n", 0) == 0);
  CHECK(csv.find('\r') == std::string::npos);
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 1 + 2 * 41);

  const auto summary = nlohmann::json::parse(read(ra.summary_path));
  for (const char* key : {"drift_predicted", "drift_fitted", "dispersion_predicted", "dispersion_fitted",
                          "periodic", "boundary_max", "max_deviation_n", "bloch_period", "max_state_error",
                          "checks"}) {
    CHECK(summary.contains(key));
  }
  CHECK(summary["max_state_error"].is_null());
  CHECK(summary["max_deviation_n"].get<double>() < 1e-10);
}

TEST_CASE("analytic-only runs with a time-dependent field") {
  auto j = nlohmann::json::parse(kSmall);
  j["scenario"] = "lissajous";
  j["field"]["profile"] = {{"kind", "harmonic"}, {"amplitude", 0.5}, {"frequency", 0.3}};
  j["grid"] = {{"t_end", 20.0}, {"samples", 21}};
  const auto cfg = parse_config(j.dump());
  const fs::path dir = scratch("profile");
  const auto r = run_scenario(cfg, {dir, true, 1});
  CHECK(r.all_passed());
  const auto summary = nlohmann::json::parse(read(r.summary_path));
  CHECK(summary["bloch_period"].is_null());
  CHECK(summary["max_deviation_n"].get<double>() < 1e-6);
}

TEST_CASE("oracle-check scenario compares against the dense oracle") {
  const auto cfg = validate_config(fs::path(BLOCH2D_SOURCE_DIR) / "configs" / "oracle_check.json");
  const fs::path dir = scratch("oracle");
  const auto r = run_scenario(cfg, {dir, true, 1}, [](const Warning&) {});
  CHECK(r.all_passed());
  const auto summary = nlohmann::json::parse(read(r.summary_path));
  CHECK(summary["max_state_error"].get<double>() < 1e-9);
}
