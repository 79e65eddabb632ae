#include "bloch2d/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bloch2d/dense_oracle.hpp"
#include "bloch2d/fit.hpp"
#include "bloch2d/phases.hpp"
#include "bloch2d/propagator.hpp"

namespace bloch2d {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += "\n";
    out += l;
  }
  return out;
}

// --- expression evaluation ---------------------------------------------------

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  double parse() {
    const double v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("cannot evaluate \"" + s_ + "\": " + what);
  }

  double expr() {
    double v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  double term() {
    double v = unary();
    for (;;) {
      if (eat('*')) v *= unary();
      else if (eat('/')) v /= unary();
      else return v;
    }
  }
  double unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }
  double primary() {
    skip();
    if (eat('(')) {
      const double v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (s_.compare(pos_, 2, "pi") == 0) {
      pos_ += 2;
      return std::numbers::pi;
    }
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail(pos_ < s_.size() ? "expected a number" : "unexpected end");
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

// --- config reading ------------------------------------------------------------

class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) { errors.push_back(path + ": " + msg); }

  void check_keys(const json& obj, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) fail(path + "." + key, "unknown key");
    }
  }

  const json* object(const json& parent, const std::string& path, const char* key, bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(path + "." + key, "missing section");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(path + "." + key, "expected an object");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& parent, const std::string& path, const char* key,
                               bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(path + "." + key, "missing value");
      return std::nullopt;
    }
    return as_number(*it, path + "." + key);
  }

  std::optional<double> as_number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      try {
        return evaluate_expression(v.get<std::string>());
      } catch (const Error& e) {
        fail(where, e.what());
        return std::nullopt;
      }
    }
    fail(where, "expected a number or an arithmetic expression string");
    return std::nullopt;
  }

  std::optional<long long> integer(const json& parent, const std::string& path, const char* key,
                                   bool required) {
    auto it = parent.find(key);
    if (it == parent.end()) {
      if (required) fail(path + "." + key, "missing value");
      return std::nullopt;
    }
    if (!it->is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return std::nullopt;
    }
    return it->get<long long>();
  }

  std::optional<std::string> string(const json& parent, const std::string& path, const char* key) {
    auto it = parent.find(key);
    if (it == parent.end()) return std::nullopt;
    if (!it->is_string()) {
      fail(path + "." + key, "expected a string");
      return std::nullopt;
    }
    return it->get<std::string>();
  }
};

std::optional<ScenarioKind> kind_from(const std::string& s) {
  if (s == "lissajous") return ScenarioKind::lissajous;
  if (s == "drift") return ScenarioKind::drift;
  if (s == "dispersion") return ScenarioKind::dispersion;
  if (s == "periodicity") return ScenarioKind::periodicity;
  if (s == "oracle-check") return ScenarioKind::oracle_check;
  return std::nullopt;
}

void read_model(Reader& rd, const json& m, ScenarioConfig& cfg) {
  const std::string path = "$.model";
  rd.check_keys(m, path, {"hbar", "delta1", "delta2", "delta3", "couplings"});
  if (auto h = rd.number(m, path, "hbar", true)) {
    if (!(*h > 0.0)) rd.fail(path + ".hbar", "must be positive");
    cfg.hbar = *h;
  }
  const bool has_deltas = m.contains("delta1") || m.contains("delta2") || m.contains("delta3");
  const bool has_map = m.contains("couplings");
  if (has_deltas == has_map) {
    rd.fail(path, "give either delta1/delta2/delta3 or a couplings list");
    return;
  }
  if (has_deltas) {
    std::array<double, 3> d{0.0, 0.0, 0.0};
    const char* keys[] = {"delta1", "delta2", "delta3"};
    for (int i = 0; i < 3; ++i) {
      if (auto v = rd.number(m, path, keys[i], true)) d[i] = *v;
    }
    cfg.deltas = d;
    return;
  }
  const json& list = m.at("couplings");
  if (!list.is_array() || list.empty()) {
    rd.fail(path + ".couplings", "expected a non-empty array of {u, v, g}");
    return;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = path + ".couplings[" + std::to_string(i) + "]";
    if (!list[i].is_object()) {
      rd.fail(p, "expected an object");
      continue;
    }
    rd.check_keys(list[i], p, {"u", "v", "g"});
    auto u = rd.integer(list[i], p, "u", true);
    auto v = rd.integer(list[i], p, "v", true);
    auto g = rd.number(list[i], p, "g", true);
    if (!u || !v || !g) continue;
    const Shift s{static_cast<int>(*u), static_cast<int>(*v)};
    if (s.is_zero()) {
      rd.fail(p, "(0,0) is not a hop");
      continue;
    }
    if (cfg.g.count(s) || cfg.g.count(-s)) {
      rd.fail(p, "duplicate hop (list one member of each (u,v), (-u,-v) pair)");
      continue;
    }
    cfg.g[s] = *g;
  }
}

void read_profile(Reader& rd, const json& p, ScenarioConfig& cfg) {
  const std::string path = "$.field.profile";
  rd.check_keys(p, path, {"kind", "slope", "amplitude", "frequency", "times", "values"});
  ProfileConfig prof;
  auto kind = rd.string(p, path, "kind");
  if (!kind) {
    rd.fail(path + ".kind", "missing value");
    return;
  }
  prof.kind = *kind;
  if (prof.kind == "linear") {
    if (auto v = rd.number(p, path, "slope", true)) prof.slope = *v;
  } else if (prof.kind == "harmonic") {
    if (auto v = rd.number(p, path, "amplitude", true)) {
      if (std::abs(*v) > 1.0) rd.fail(path + ".amplitude", "must lie in [-1, 1] to keep f >= 0");
      prof.amplitude = *v;
    }
    if (auto v = rd.number(p, path, "frequency", true)) prof.frequency = *v;
  } else if (prof.kind == "steps") {
    auto list = [&](const char* key, std::vector<double>& out) {
      auto it = p.find(key);
      if (it == p.end() || !it->is_array()) {
        rd.fail(path + "." + key, "expected an array");
        return;
      }
      for (std::size_t i = 0; i < it->size(); ++i) {
        if (auto v = rd.as_number((*it)[i], path + "." + key + "[" + std::to_string(i) + "]")) {
          out.push_back(*v);
        }
      }
    };
    list("times", prof.times);
    list("values", prof.values);
    if (prof.times.size() != prof.values.size() || prof.times.empty()) {
      rd.fail(path, "times and values must be non-empty and of equal length");
    } else {
      if (prof.times.front() != 0.0) rd.fail(path + ".times[0]", "must be 0");
      for (std::size_t i = 1; i < prof.times.size(); ++i) {
        if (!(prof.times[i] > prof.times[i - 1])) {
          rd.fail(path + ".times", "must be strictly increasing");
          break;
        }
      }
      for (double v : prof.values) {
        if (v < 0.0) {
          rd.fail(path + ".values", "must be non-negative");
          break;
        }
      }
    }
  } else {
    rd.fail(path + ".kind", "unknown profile kind '" + prof.kind + "' (linear, harmonic, steps)");
    return;
  }
  cfg.profile = prof;
}

void read_field(Reader& rd, const json& f, ScenarioConfig& cfg) {
  const std::string path = "$.field";
  rd.check_keys(f, path, {"F", "q", "r", "F1", "F2", "profile"});
  const bool polar = f.contains("F") || f.contains("q") || f.contains("r");
  const bool cartesian = f.contains("F1") || f.contains("F2");
  if (polar == cartesian) {
    rd.fail(path, "give either F with q, r or the components F1, F2");
    return;
  }
  if (polar) {
    auto F = rd.number(f, path, "F", true);
    auto q = rd.integer(f, path, "q", true);
    auto r = rd.integer(f, path, "r", true);
    if (F && *F < 0.0) rd.fail(path + ".F", "must be non-negative");
    if (F) cfg.F = *F;
    if (q && r) {
      cfg.q = static_cast<int>(*q);
      cfg.r = static_cast<int>(*r);
      try {
        FieldSpec(cfg.q, cfg.r, 1.0);
      } catch (const Error& e) {
        rd.fail(path, e.what());
      }
    }
  } else {
    auto F1 = rd.number(f, path, "F1", true);
    auto F2 = rd.number(f, path, "F2", true);
    if (F1 && F2) {
      try {
        const FieldSpec spec = reduce_direction(*F1, *F2);
        cfg.q = spec.q();
        cfg.r = spec.r();
        cfg.F = std::hypot(*F1, *F2);
      } catch (const Error& e) {
        rd.fail(path, e.what());
      }
    }
  }
  if (const json* p = rd.object(f, path, "profile", false)) read_profile(rd, *p, cfg);
}

void read_state(Reader& rd, const json& s, ScenarioConfig& cfg) {
  const std::string path = "$.state";
  rd.check_keys(s, path, {"sigma", "k1", "k2", "centre"});
  if (auto v = rd.number(s, path, "sigma", true)) {
    if (!(*v > 0.0)) rd.fail(path + ".sigma", "must be positive");
    cfg.state.sigma = *v;
  }
  if (auto v = rd.number(s, path, "k1", false)) cfg.state.k1 = *v;
  if (auto v = rd.number(s, path, "k2", false)) cfg.state.k2 = *v;
  if (auto it = s.find("centre"); it != s.end()) {
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number_integer() ||
        !(*it)[1].is_number_integer()) {
      rd.fail(path + ".centre", "expected [m, n] with integer entries");
    } else {
      cfg.state.centre_m = (*it)[0].get<int>();
      cfg.state.centre_n = (*it)[1].get<int>();
    }
  }
}

void read_grid(Reader& rd, const json& g, ScenarioConfig& cfg) {
  const std::string path = "$.grid";
  rd.check_keys(g, path, {"periods", "t_end", "samples"});
  const bool periods = g.contains("periods");
  if (periods == g.contains("t_end")) {
    rd.fail(path, "give exactly one of periods and t_end");
  } else if (periods) {
    if (auto v = rd.number(g, path, "periods", true)) {
      if (!(*v > 0.0)) rd.fail(path + ".periods", "must be positive");
      cfg.periods = *v;
    }
  } else if (auto v = rd.number(g, path, "t_end", true)) {
    if (!(*v > 0.0)) rd.fail(path + ".t_end", "must be positive");
    cfg.t_end = *v;
  }
  if (auto n = rd.integer(g, path, "samples", true)) {
    if (*n < 2 || *n > 1000000) rd.fail(path + ".samples", "must lie in [2, 1000000]");
    cfg.samples = static_cast<int>(*n);
  }
}

void read_outputs(Reader& rd, const json& o, ScenarioConfig& cfg) {
  const std::string path = "$.outputs";
  rd.check_keys(o, path, {"trajectory", "summary", "sources"});
  if (auto s = rd.string(o, path, "trajectory")) cfg.trajectory_file = *s;
  if (auto s = rd.string(o, path, "summary")) cfg.summary_file = *s;
  if (auto it = o.find("sources"); it != o.end()) {
    cfg.analytic = cfg.numeric = false;
    if (!it->is_array() || it->empty()) {
      rd.fail(path + ".sources", "expected a non-empty array");
      return;
    }
    for (const auto& v : *it) {
      if (v == "analytic") cfg.analytic = true;
      else if (v == "numeric") cfg.numeric = true;
      else rd.fail(path + ".sources", "entries must be \"analytic\" or \"numeric\"");
    }
  }
  for (const std::string* name : {&cfg.trajectory_file, &cfg.summary_file}) {
    if (name->find('/') != std::string::npos || *name == "." || *name == "..") {
      rd.fail(path, "file names must not contain directories (use --out)");
    }
  }
}

void check_semantics(Reader& rd, const ScenarioConfig& cfg) {
  const bool constant = !cfg.profile;
  if (cfg.periods && (!constant || !(cfg.F > 0.0))) {
    rd.fail("$.grid.periods", "needs a constant non-zero field; use t_end");
  }
  const std::string name = to_string(cfg.scenario);
  if (cfg.scenario != ScenarioKind::lissajous && !constant) {
    rd.fail("$.field.profile", "scenario " + name + " needs a constant field");
  }
  if (cfg.scenario != ScenarioKind::lissajous && constant && !(cfg.F > 0.0)) {
    rd.fail("$.field.F", "scenario " + name + " needs a non-zero field");
  }
  const bool needs_numeric = cfg.scenario == ScenarioKind::drift ||
                             cfg.scenario == ScenarioKind::dispersion ||
                             cfg.scenario == ScenarioKind::oracle_check;
  if (needs_numeric && !cfg.numeric) {
    rd.fail("$.outputs.sources", "scenario " + name + " needs the numeric source");
  }
  if (cfg.scenario == ScenarioKind::oracle_check && cfg.L > 16) {
    rd.fail("$.window.L", "oracle-check runs the dense oracle and needs L <= 16");
  }
}

// Builds every domain object once so invariant violations surface at load.
void check_objects(Reader& rd, const ScenarioConfig& cfg) {
  try {
    cfg.couplings();
  } catch (const Error& e) {
    rd.fail("$.model", e.what());
  }
  std::optional<LatticeWindow> window;
  try {
    window.emplace(cfg.L);
  } catch (const Error& e) {
    rd.fail("$.window.L", e.what());
  }
  if (window) {
    try {
      cfg.initial_state();
    } catch (const Error& e) {
      rd.fail("$.state", e.what());
    }
  }
}

// --- output ------------------------------------------------------------------

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_rows(std::string& out, const std::vector<ObservableSample>& rows, const char* source) {
  for (const auto& s : rows) {
    for (double v : {s.t, s.n1, s.n2, s.n1sq, s.n2sq, s.var1, s.var2}) {
      out += format_double(v);
      out += ',';
    }
    out += source;
    out += '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

ordered_json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

ordered_json pair_or_null(std::optional<std::pair<double, double>> v) {
  if (!v) return nullptr;
  return ordered_json::array({v->first, v->second});
}

// Indices i whose shifted time t_i + period stays inside the grid, thinned to
// at most `limit` evenly spread entries.
std::vector<std::size_t> return_indices(const std::vector<double>& grid, double period,
                                        std::size_t limit) {
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] + period <= grid.back() * (1.0 + 1e-12)) all.push_back(i);
  }
  if (all.size() <= limit) return all;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < limit; ++k) out.push_back(all[k * (all.size() - 1) / (limit - 1)]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(join(violations)), violations_(std::move(violations)) {}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::lissajous: return "lissajous";
    case ScenarioKind::drift: return "drift";
    case ScenarioKind::dispersion: return "dispersion";
    case ScenarioKind::periodicity: return "periodicity";
    case ScenarioKind::oracle_check: return "oracle-check";
  }
  return "unknown";
}

double evaluate_expression(const std::string& text) { return ExprParser(text).parse(); }

CouplingSet ScenarioConfig::couplings() const {
  if (deltas) return CouplingSet::tight_binding((*deltas)[0], (*deltas)[1], (*deltas)[2], hbar);
  return CouplingSet::symmetrized(hbar, g);
}

FieldSpec ScenarioConfig::field() const {
  const double f = F / hbar;
  if (!profile) return FieldSpec(q, r, f);
  const ProfileConfig p = *profile;
  MagnitudeProfile mp;
  if (p.kind == "linear") {
    mp.f = [f, s = p.slope](double t) { return std::max(0.0, f * (1.0 + s * t)); };
  } else if (p.kind == "harmonic") {
    mp.f = [f, a = p.amplitude, w = p.frequency](double t) { return f * (1.0 + a * std::cos(w * t)); };
  } else {
    mp.f = [f, times = p.times, values = p.values](double t) {
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      const std::size_t i = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
      return f * values[i];
    };
    mp.breakpoints.assign(p.times.begin() + 1, p.times.end());
    mp.smoothness = MagnitudeProfile::Smoothness::piecewise;
  }
  return FieldSpec(q, r, std::move(mp));
}

LatticeState ScenarioConfig::initial_state() const { return gaussian_state(state, window()); }

double ScenarioConfig::grid_end() const {
  if (t_end) return *t_end;
  return *periods * bloch_period(field());
}

std::vector<double> ScenarioConfig::grid() const {
  const double end = grid_end();
  std::vector<double> out;
  if (scenario == ScenarioKind::oracle_check) {
    // Random sample times in (0, end], reproducible from the seed.
    std::mt19937_64 rng(seed);
    for (int i = 0; i < samples; ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      out.push_back(end * (1.0 - u));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  for (int i = 0; i < samples; ++i) out.push_back(end * i / (samples - 1));
  return out;
}

ScenarioConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");

  Reader rd;
  ScenarioConfig cfg;
  rd.check_keys(doc, "$", {"schema", "scenario", "model", "field", "state", "grid", "window",
                           "outputs", "seed"});
  if (auto v = rd.integer(doc, "$", "schema", true); v && *v != 1) {
    rd.fail("$.schema", "unsupported schema version " + std::to_string(*v) + " (expected 1)");
  }
  if (auto s = rd.string(doc, "$", "scenario")) {
    if (auto k = kind_from(*s)) cfg.scenario = *k;
    else rd.fail("$.scenario", "unknown scenario '" + *s + "'");
  } else if (!doc.contains("scenario")) {
    rd.fail("$.scenario", "missing value");
  }
  if (auto v = rd.integer(doc, "$", "seed", false)) {
    if (*v < 0) rd.fail("$.seed", "must be non-negative");
    else cfg.seed = static_cast<std::uint64_t>(*v);
  }
  if (const json* m = rd.object(doc, "$", "model", true)) read_model(rd, *m, cfg);
  if (const json* f = rd.object(doc, "$", "field", true)) read_field(rd, *f, cfg);
  if (const json* s = rd.object(doc, "$", "state", true)) read_state(rd, *s, cfg);
  if (const json* g = rd.object(doc, "$", "grid", true)) read_grid(rd, *g, cfg);
  if (const json* w = rd.object(doc, "$", "window", true)) {
    rd.check_keys(*w, "$.window", {"L"});
    if (auto L = rd.integer(*w, "$.window", "L", true)) {
      if (*L < 4 || *L > 8192) rd.fail("$.window.L", "must lie in [4, 8192]");
      else cfg.L = static_cast<int>(*L);
    }
  }
  const std::string name = to_string(cfg.scenario);
  cfg.trajectory_file = name + "_trajectory.csv";
  cfg.summary_file = name + "_summary.json";
  if (const json* o = rd.object(doc, "$", "outputs", false)) read_outputs(rd, *o, cfg);

  if (rd.errors.empty()) check_semantics(rd, cfg);
  if (rd.errors.empty()) check_objects(rd, cfg);
  if (!rd.errors.empty()) throw ValidationError(rd.errors);
  return cfg;
}

ScenarioConfig validate_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

bool RunResult::all_passed() const {
  return std::all_of(gates.begin(), gates.end(), [](const GateResult& g) { return g.passed; });
}

RunResult run_scenario(const ScenarioConfig& cfg, const RunOptions& options,
                       const WarningSink& outer_sink) {
  // Each warning code is reported once per run.
  auto seen = std::make_shared<std::set<std::string>>();
  const WarningSink sink = [outer_sink, seen](const Warning& w) {
    if (seen->insert(w.code).second) emit_warning(outer_sink, w);
  };
  const CouplingSet couplings = cfg.couplings();
  const FieldSpec field = cfg.field();
  const LatticeWindow window = cfg.window();
  const LatticeState initial = cfg.initial_state();
  const std::vector<double> grid = cfg.grid();
  const InitialMoments moments = initial_moments(initial, couplings, sink);
  const bool constant = field.is_constant() && field.magnitude() > 0.0;
  const double period = constant ? bloch_period(field) : std::nan("");

  RunResult result;
  auto gate = [&](const std::string& name, double value, double limit) {
    result.gates.push_back({name, value, limit, value < limit});
  };

  std::vector<ObservableSample> analytic;
  if (cfg.analytic) analytic = analytic_trajectory(moments, field, couplings, grid);

  PropagationPlan plan{window, field, couplings, grid, {true, constant}, options.threads};
  std::optional<TrajectoryRecord> numeric;
  if (cfg.numeric) numeric = evolve(plan, initial, sink);

  const double boundary_max = numeric ? numeric->boundary_max : boundary_occupancy(initial);
  const std::vector<ObservableSample>& primary = numeric ? numeric->samples : analytic;

  std::optional<double> max_dev;
  if (numeric && cfg.analytic) {
    double d = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      d = std::max({d, std::abs(analytic[i].n1 - numeric->samples[i].n1),
                    std::abs(analytic[i].n2 - numeric->samples[i].n2)});
    }
    max_dev = d;
    if (boundary_max < kBoundaryWarnThreshold) gate("max_deviation_n", d, 1e-6);
  }

  const PeriodicityVerdict verdict = periodicity_condition(cfg.state.k1, cfg.state.k2, cfg.q, cfg.r);
  bool has_divergent = false;
  for (Shift s : couplings.active()) has_divergent = has_divergent || field_projection(s, field) == 0;
  const bool periodic = !has_divergent || verdict.periodic;

  std::optional<std::pair<double, double>> drift_predicted;
  std::optional<std::pair<double, double>> drift_fitted;
  std::optional<double> dispersion_predicted;
  std::optional<double> dispersion_fitted;
  std::optional<double> dispersion_residual;
  if (constant) {
    const DriftVelocity v = drift_velocity(moments, field, couplings);
    drift_predicted = std::make_pair(v.vx, v.vy);
    try {
      dispersion_predicted = dispersion_coefficient(moments, field, couplings);
    } catch (const NotDivergentDirection&) {
    }
    const double omega = bloch_frequency(field);
    const int h = max_harmonic(couplings, field);
    std::vector<double> n1, n2;
    for (const auto& s : primary) {
      n1.push_back(s.n1);
      n2.push_back(s.n2);
    }
    try {
      const DriftFit fit = fit_drift(grid, n1, n2, omega, h);
      drift_fitted = std::make_pair(fit.vx, fit.vy);
    } catch (const InvalidArgument&) {
    }
    if (numeric) {
      try {
        const DispersionFit fit = fit_dispersion(grid, numeric->orthogonal_variance, omega, 2 * h);
        dispersion_fitted = fit.coefficient;
        dispersion_residual = fit.residual;
      } catch (const InvalidArgument&) {
      }
    }
  }

  // Return after one Bloch period, for the centre of mass or its projection
  // q N_1 + r N_2 onto the field direction.
  auto period_return = [&](bool projection, bool use_numeric) -> std::optional<double> {
    const auto idx = return_indices(grid, period, 64);
    if (idx.empty()) return std::nullopt;
    std::vector<double> shifted;
    for (std::size_t i : idx) shifted.push_back(grid[i] + period);
    std::vector<ObservableSample> later;
    const std::vector<ObservableSample>* base = nullptr;
    if (use_numeric) {
      PropagationPlan p = plan;
      p.t_grid = shifted;
      p.records = {true, false};
      later = evolve(p, initial, sink).samples;
      base = &numeric->samples;
    } else {
      later = analytic_trajectory(moments, field, couplings, shifted);
      base = &analytic;
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const ObservableSample& a = (*base)[idx[k]];
      const ObservableSample& b = later[k];
      const double d = projection ? std::abs(cfg.q * (b.n1 - a.n1) + cfg.r * (b.n2 - a.n2))
                                  : std::hypot(b.n1 - a.n1, b.n2 - a.n2);
      worst = std::max(worst, d);
    }
    return worst;
  };

  std::optional<double> max_state_error;
  ordered_json extra = ordered_json::object();

  switch (cfg.scenario) {
    case ScenarioKind::lissajous: {
      if (!constant) break;
      gate("periodic_verdict", periodic ? 0.0 : 1.0, 0.5);
      for (bool use_numeric : {false, true}) {
        if (use_numeric ? !numeric : !cfg.analytic) continue;
        if (auto r = period_return(false, use_numeric)) {
          const std::string key = use_numeric ? "period_return_numeric" : "period_return_analytic";
          extra[key] = *r;
          gate(key, *r, 1e-5);
        }
      }
      break;
    }
    case ScenarioKind::periodicity: {
      for (bool use_numeric : {false, true}) {
        if (use_numeric ? !numeric : !cfg.analytic) continue;
        if (auto r = period_return(true, use_numeric)) {
          const std::string key =
              use_numeric ? "projection_return_numeric" : "projection_return_analytic";
          extra[key] = *r;
          gate(key, *r, 1e-6);
        }
      }
      break;
    }
    case ScenarioKind::drift: {
      if (!drift_fitted) {
        gate("drift_fit_available", 1.0, 0.5);
        break;
      }
      const auto [px, py] = *drift_predicted;
      const auto [fx, fy] = *drift_fitted;
      const double rel = std::hypot(fx - px, fy - py) / std::max(std::hypot(px, py), 1e-300);
      const double norm = std::hypot(fx, fy) * std::hypot(cfg.q, cfg.r);
      const double angle = norm > 0.0 ? std::abs(std::asin(std::clamp((fx * cfg.q + fy * cfg.r) / norm, -1.0, 1.0)))
                                      : std::numbers::pi / 2;
      extra["drift_relative_error"] = rel;
      extra["drift_orthogonality_rad"] = angle;
      gate("drift_relative_error", rel, 1e-2);
      gate("drift_orthogonality_rad", angle, 1e-6);
      break;
    }
    case ScenarioKind::dispersion: {
      if (!dispersion_fitted || !dispersion_predicted) {
        gate("dispersion_fit_available", 1.0, 0.5);
        break;
      }
      const double rel = std::abs(*dispersion_fitted / *dispersion_predicted - 1.0);
      extra["dispersion_relative_error"] = rel;
      extra["dispersion_fit_residual"] = *dispersion_residual;
      gate("dispersion_relative_error", rel, 2e-2);
      gate("dispersion_fit_residual", *dispersion_residual, 5e-2);
      break;
    }
    case ScenarioKind::oracle_check: {
      double state_err = 0.0;
      double moment_err = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        PropagationPlan p = plan;
        p.t_grid = {grid[i]};
        const LatticeState split = evolve(p, initial, sink).final_state;
        const LatticeState dense = dense_oracle(window, field, couplings, grid[i], initial);
        state_err = std::max(state_err, distance(split, dense));
        if (cfg.analytic) {
          const ObservableSample& a = analytic[i];
          for (int axis = 1; axis <= 2; ++axis) {
            moment_err = std::max(moment_err, std::abs((axis == 1 ? a.n1 : a.n2) - expectation_N(dense, axis)));
            moment_err = std::max(moment_err, std::abs((axis == 1 ? a.n1sq : a.n2sq) - expectation_N2(dense, axis)));
          }
        }
      }
      max_state_error = state_err;
      gate("max_state_error", state_err, 1e-9);
      if (cfg.analytic) {
        extra["dense_moment_error"] = moment_err;
        gate("dense_moment_error", moment_err, 1e-8);
      }
      break;
    }
  }

  // Trajectory table.
  std::string csv = "t,n1,n2,n1sq,n2sq,var1,var2,source\n";
  if (cfg.analytic) append_rows(csv, analytic, "analytic");
  if (numeric) append_rows(csv, numeric->samples, "numeric");

  ordered_json summary;
  summary["scenario"] = to_string(cfg.scenario);
  summary["drift_predicted"] = pair_or_null(drift_predicted);
  summary["drift_fitted"] = pair_or_null(drift_fitted);
  summary["dispersion_predicted"] = number_or_null(dispersion_predicted);
  summary["dispersion_fitted"] = number_or_null(dispersion_fitted);
  summary["periodic"] = periodic;
  summary["boundary_max"] = boundary_max;
  summary["max_deviation_n"] = number_or_null(max_dev);
  summary["bloch_period"] = number_or_null(constant ? std::optional<double>(period) : std::nullopt);
  summary["max_state_error"] = number_or_null(max_state_error);
  summary["diagnostics"] = extra;
  ordered_json checks = ordered_json::object();
  for (const auto& g : result.gates) {
    checks[g.name] = {{"value", g.value}, {"limit", g.limit}, {"passed", g.passed}};
  }
  summary["checks"] = checks;
  summary["passed"] = result.all_passed();

  std::filesystem::create_directories(options.out_dir);
  result.trajectory_path = options.out_dir / cfg.trajectory_file;
  result.summary_path = options.out_dir / cfg.summary_file;
  write_file(result.trajectory_path, csv);
  write_file(result.summary_path, summary.dump(2) + "\n");
  return result;
}

}  // namespace bloch2d
