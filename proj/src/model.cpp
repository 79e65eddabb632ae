#include "bloch2d/model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace bloch2d {

void emit_warning(const WarningSink& sink, const Warning& w) {
  if (sink) {
    sink(w);
    return;
  }
  std::cerr << "warning [" << w.code << "]: " << w.message << '\n';
}

// ---------------------------------------------------------------------------
// CouplingSet

CouplingSet::CouplingSet(double hbar, std::map<Shift, double> entries)
    : hbar_(hbar), entries_(std::move(entries)) {
  if (!(hbar_ > 0.0) || !std::isfinite(hbar_)) {
    throw InvalidArgument("hbar must be positive and finite");
  }
  for (const auto& [s, g] : entries_) {
    if (s.is_zero()) throw InvalidArgument("coupling set may not contain (0,0)");
    if (!std::isfinite(g)) throw InvalidArgument("coupling strengths must be finite");
    auto it = entries_.find(-s);
    if (it == entries_.end() || it->second != g) {
      std::ostringstream os;
      os << "coupling set is not symmetric: g(" << s.u << "," << s.v << ") has no equal partner g("
         << -s.u << "," << -s.v << ")";
      throw InvalidArgument(os.str());
    }
  }
}

CouplingSet CouplingSet::tight_binding(double delta1, double delta2, double delta3, double hbar) {
  if (!(hbar > 0.0)) throw InvalidArgument("hbar must be positive");
  const double g1 = delta1 / (4.0 * hbar);
  const double g2 = delta2 / (4.0 * hbar);
  const double g3 = delta3 / (4.0 * hbar);
  std::map<Shift, double> e{
      {{1, 0}, g1},  {{-1, 0}, g1},  {{0, 1}, g2},  {{0, -1}, g2},
      {{1, 1}, g3},  {{-1, -1}, g3}, {{1, -1}, g3}, {{-1, 1}, g3},
  };
  return CouplingSet(hbar, std::move(e));
}

CouplingSet CouplingSet::symmetrized(double hbar, const std::map<Shift, double>& half) {
  std::map<Shift, double> full;
  for (const auto& [s, g] : half) {
    for (Shift key : {s, -s}) {
      auto [it, inserted] = full.emplace(key, g);
      if (!inserted && it->second != g) {
        std::ostringstream os;
        os << "conflicting couplings for (" << key.u << "," << key.v << ")";
        throw InvalidArgument(os.str());
      }
    }
  }
  return CouplingSet(hbar, std::move(full));
}

double CouplingSet::g(Shift s) const {
  auto it = entries_.find(s);
  return it == entries_.end() ? 0.0 : it->second;
}

std::vector<Shift> CouplingSet::active() const {
  std::vector<Shift> out;
  for (const auto& [s, g] : entries_) {
    if (g != 0.0) out.push_back(s);
  }
  return out;
}

bool CouplingSet::nearest_neighbour_only() const {
  for (Shift s : active()) {
    if (std::abs(s.u) > 1 || std::abs(s.v) > 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// FieldSpec

namespace {

void check_direction(int q, int r) {
  if (q == 0 && r == 0) throw ZeroField("field direction (0,0)");
  const int g = std::gcd(std::abs(q), std::abs(r));
  if (g != 1) {
    std::ostringstream os;
    os << "direction (" << q << "," << r << ") is not reduced: gcd = " << g;
    throw InvalidArgument(os.str());
  }
}

}  // namespace

FieldSpec::FieldSpec(int q, int r, double magnitude) : q_(q), r_(r), magnitude_(magnitude) {
  check_direction(q, r);
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw InvalidArgument("field magnitude must be finite and non-negative");
  }
}

FieldSpec::FieldSpec(int q, int r, MagnitudeProfile profile)
    : q_(q), r_(r), magnitude_(std::move(profile)) {
  check_direction(q, r);
  auto& p = std::get<MagnitudeProfile>(magnitude_);
  if (!p.f) throw InvalidArgument("magnitude profile has no callable");
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
}

double FieldSpec::direction_norm() const { return std::hypot(q_, r_); }

double FieldSpec::magnitude() const {
  if (const double* f = std::get_if<double>(&magnitude_)) return *f;
  throw TimeDependentField("field magnitude is time dependent");
}

double FieldSpec::magnitude_at(double t) const {
  if (const double* f = std::get_if<double>(&magnitude_)) return *f;
  return std::get<MagnitudeProfile>(magnitude_).f(t);
}

std::pair<double, double> FieldSpec::components_at(double t) const {
  const double scale = magnitude_at(t) / direction_norm();
  return {scale * q_, scale * r_};
}

FieldSpec reduce_direction(double f1, double f2) {
  if (!std::isfinite(f1) || !std::isfinite(f2)) throw InvalidArgument("field components must be finite");
  if (f1 == 0.0 && f2 == 0.0) throw ZeroField("both field components vanish");
  constexpr long kMaxDenominator = 64;
  constexpr double kTolerance = 1e-9;

  const double f = std::hypot(f1, f2);
  const double a1 = std::abs(f1);
  const double a2 = std::abs(f2);
  long num = 0;  // approximates min(a1,a2)
  long den = 1;  // approximates max(a1,a2)
  if (a1 != 0.0 && a2 != 0.0) {
    // Convergents of x = small/large in (0, 1].
    const double x = std::min(a1, a2) / std::max(a1, a2);
    long h_prev = 0, h = 1;  // numerators h_{n-2}, h_{n-1}
    long k_prev = 1, k = 0;  // denominators
    double rem = x;
    for (int iter = 0; iter < 64; ++iter) {
      const double a_floor = std::floor(rem);
      const long a = static_cast<long>(a_floor);
      const long h_next = a * h + h_prev;
      const long k_next = a * k + k_prev;
      if (k_next > kMaxDenominator) break;
      h_prev = h;
      h = h_next;
      k_prev = k;
      k = k_next;
      const double frac = rem - a_floor;
      if (frac < 1e-15 || std::abs(static_cast<double>(h) / k - x) < 1e-15) break;
      rem = 1.0 / frac;
    }
    num = h;
    den = k;
    if (num == 0) {
      throw NonRationalDirection("field ratio is not representable with denominators <= 64");
    }
  }
  long q = 0, r = 0;
  if (a1 <= a2) {
    q = num;
    r = den;
  } else {
    q = den;
    r = num;
  }
  if (a2 == 0.0) {
    q = 1;
    r = 0;
  } else if (a1 == 0.0) {
    q = 0;
    r = 1;
  }
  if (f1 < 0) q = -q;
  if (f2 < 0) r = -r;

  const double norm = std::hypot(static_cast<double>(q), static_cast<double>(r));
  const double err1 = std::abs(f * q / norm - f1);
  const double err2 = std::abs(f * r / norm - f2);
  if (err1 > kTolerance * f || err2 > kTolerance * f) {
    std::ostringstream os;
    os.precision(17);
    os << "field ratio " << f1 << "/" << f2 << " has no rational approximation with denominator <= "
       << kMaxDenominator << " (best " << q << "/" << r << ")";
    throw NonRationalDirection(os.str());
  }
  return FieldSpec(static_cast<int>(q), static_cast<int>(r), f);
}

// ---------------------------------------------------------------------------
// Window and state

LatticeWindow::LatticeWindow(int L) : L_(L) {
  if (L < 4 || L % 2 != 0) {
    throw InvalidArgument("window size must be an even integer >= 4, got " + std::to_string(L));
  }
}

double LatticeWindow::quasimomentum(int p) const {
  return 2.0 * std::numbers::pi * static_cast<double>(p) / L_;
}

LatticeState::LatticeState(LatticeWindow window, std::vector<cplx> amplitudes)
    : window_(window), amps_(std::move(amplitudes)) {
  if (amps_.size() != window_.sites()) {
    throw InvalidArgument("amplitude count does not match window");
  }
}

LatticeState LatticeState::normalized(LatticeWindow window, std::vector<cplx> amplitudes) {
  LatticeState s(window, std::move(amplitudes));
  const double n2 = s.norm_squared();
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw InvalidArgument("state has zero or non-finite norm");
  const double scale = 1.0 / std::sqrt(n2);
  for (auto& c : s.amps_) c *= scale;
  return s;
}

LatticeState LatticeState::point(LatticeWindow window, int m, int n) {
  std::vector<cplx> a(window.sites());
  a[window.site(m, n)] = 1.0;
  return LatticeState(window, std::move(a));
}

double LatticeState::norm_squared() const {
  double s = 0.0;
  for (const auto& c : amps_) s += std::norm(c);
  return s;
}

LatticeState gaussian_state(const GaussianSpec& spec, const LatticeWindow& window) {
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw InvalidArgument("gaussian width sigma must be positive");
  }
  const double half_support = 3.0 * spec.sigma;
  const double reach_m = std::abs(spec.centre_m) + half_support;
  const double reach_n = std::abs(spec.centre_n) + half_support;
  if (reach_m > window.size() / 2.0 || reach_n > window.size() / 2.0) {
    std::ostringstream os;
    os << "gaussian support (6 sigma = " << 6.0 * spec.sigma << " around centre (" << spec.centre_m
       << "," << spec.centre_n << ")) does not fit a window of " << window.size() << " sites";
    throw WindowTooSmall(os.str());
  }
  const double inv4s2 = 1.0 / (4.0 * spec.sigma * spec.sigma);
  std::vector<cplx> a(window.sites());
  for (int m = window.lo(); m <= window.hi(); ++m) {
    const double dm = m - spec.centre_m;
    for (int n = window.lo(); n <= window.hi(); ++n) {
      const double dn = n - spec.centre_n;
      const double amp = std::exp(-(dm * dm + dn * dn) * inv4s2);
      a[window.site(m, n)] = std::polar(amp, spec.k1 * dm + spec.k2 * dn);
    }
  }
  return LatticeState::normalized(window, std::move(a));
}

double boundary_occupancy(const LatticeState& state) {
  const auto& w = state.window();
  auto in_ring = [&](int i) { return i <= w.lo() + 1 || i >= w.hi() - 1; };
  double p = 0.0;
  for (int m = w.lo(); m <= w.hi(); ++m) {
    const bool row_in_ring = in_ring(m);
    for (int n = w.lo(); n <= w.hi(); ++n) {
      if (row_in_ring || in_ring(n)) p += std::norm(state.at(m, n));
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Expectation values

namespace {

// sum_{m,n} weight(m) c*_{m,n} c_{m+u,n+v}; rows are m.
template <class Weight>
cplx shifted_overlap(const LatticeState& state, int u, int v, Weight weight) {
  const auto& w = state.window();
  const int L = w.size();
  const auto& c = state.amplitudes();
  cplx total = 0.0;
  for (int m = w.lo(); m <= w.hi(); ++m) {
    const cplx* row = &c[w.site(m, w.lo())];
    const cplx* shifted_row = &c[w.site(m + u, w.lo())];
    // column offset of n+v for n = lo is (v mod L)
    const int offset = w.wrap(w.lo() + v) - w.lo();
    cplx acc = 0.0;
    for (int j = 0; j < L; ++j) {
      int js = j + offset;
      if (js >= L) js -= L;
      acc += std::conj(row[j]) * shifted_row[js];
    }
    total += weight(m) * acc;
  }
  return total;
}

// Same with the weight depending on the column index n.
template <class Weight>
cplx shifted_overlap_cols(const LatticeState& state, int u, int v, Weight weight) {
  const auto& w = state.window();
  const int L = w.size();
  const auto& c = state.amplitudes();
  std::vector<double> wt(L);
  for (int j = 0; j < L; ++j) wt[j] = weight(w.lo() + j);
  cplx total = 0.0;
  const int offset = w.wrap(w.lo() + v) - w.lo();
  for (int m = w.lo(); m <= w.hi(); ++m) {
    const cplx* row = &c[w.site(m, w.lo())];
    const cplx* shifted_row = &c[w.site(m + u, w.lo())];
    for (int j = 0; j < L; ++j) {
      int js = j + offset;
      if (js >= L) js -= L;
      total += wt[j] * std::conj(row[j]) * shifted_row[js];
    }
  }
  return total;
}

cplx raw_K(const LatticeState& s, int u, int v) {
  return shifted_overlap(s, u, v, [](int) { return 1.0; });
}

void check_boundary(const LatticeState& state, const WarningSink& sink) {
  const double occ = boundary_occupancy(state);
  if (occ > kBoundaryWarnThreshold) {
    std::ostringstream os;
    os << "boundary ring holds probability " << occ << " (> " << kBoundaryWarnThreshold
       << "); periodic wrap may alias shifted overlaps";
    emit_warning(sink, {"boundary_occupancy", os.str(), occ});
  }
}

}  // namespace

cplx expectation_K(const LatticeState& state, int u, int v, const WarningSink& sink) {
  if (u == 0 && v == 0) return state.norm_squared();
  check_boundary(state, sink);
  return raw_K(state, u, v);
}

double expectation_N(const LatticeState& state, int axis) {
  const auto& w = state.window();
  double s = 0.0;
  for (int m = w.lo(); m <= w.hi(); ++m) {
    for (int n = w.lo(); n <= w.hi(); ++n) {
      s += (axis == 1 ? m : n) * std::norm(state.at(m, n));
    }
  }
  return s;
}

double expectation_N2(const LatticeState& state, int axis) {
  const auto& w = state.window();
  double s = 0.0;
  for (int m = w.lo(); m <= w.hi(); ++m) {
    for (int n = w.lo(); n <= w.hi(); ++n) {
      const double x = axis == 1 ? m : n;
      s += x * x * std::norm(state.at(m, n));
    }
  }
  return s;
}

cplx expectation_J(const LatticeState& state, int v) {
  const auto& w = state.window();
  return shifted_overlap(state, 1, v, [&](int m) { return static_cast<double>(m + w.wrap(m + 1)); });
}

cplx expectation_L(const LatticeState& state, int u) {
  const auto& w = state.window();
  return shifted_overlap_cols(state, u, 1, [&](int n) { return static_cast<double>(n + w.wrap(n + 1)); });
}

// ---------------------------------------------------------------------------
// InitialMoments

cplx InitialMoments::k(Shift s) const {
  if (s.is_zero()) return 1.0;
  if (auto it = K.find(s); it != K.end()) return it->second;
  if (auto it = K.find(-s); it != K.end()) return std::conj(it->second);
  std::ostringstream os;
  os << "moment <K_{" << s.u << "," << s.v << "}> was not gathered";
  throw MissingMoment(os.str());
}

cplx InitialMoments::j(int v) const {
  if (auto it = J.find(v); it != J.end()) return it->second;
  throw MissingMoment("moment J_" + std::to_string(v) + " was not gathered");
}

cplx InitialMoments::l(int u) const {
  if (auto it = L.find(u); it != L.end()) return it->second;
  throw MissingMoment("moment L_" + std::to_string(u) + " was not gathered");
}

std::vector<Shift> required_moment_indices(const CouplingSet& couplings) {
  const auto act = couplings.active();
  std::set<Shift> idx(act.begin(), act.end());
  for (int axis : {1, 2}) {
    for (Shift a : act) {
      if (a.component(axis) == 0) continue;
      for (Shift b : act) {
        if (b.component(axis) == 0) continue;
        idx.insert(a + b);
      }
    }
  }
  idx.erase(Shift{0, 0});
  return {idx.begin(), idx.end()};
}

InitialMoments initial_moments(const LatticeState& state, const CouplingSet& couplings,
                               const WarningSink& sink) {
  check_boundary(state, sink);
  InitialMoments mo;
  for (Shift s : required_moment_indices(couplings)) mo.K[s] = raw_K(state, s.u, s.v);
  for (Shift a : couplings.active()) {
    if (a.u == 1) mo.J[a.v] = expectation_J(state, a.v);
    if (a.v == 1) mo.L[a.u] = expectation_L(state, a.u);
  }
  mo.N1_0 = expectation_N(state, 1);
  mo.N2_0 = expectation_N(state, 2);
  mo.N1sq_0 = expectation_N2(state, 1);
  mo.N2sq_0 = expectation_N2(state, 2);
  return mo;
}

}  // namespace bloch2d
