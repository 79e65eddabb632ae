#pragma once

#include <complex>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "bloch2d/errors.hpp"

namespace bloch2d {

using cplx = std::complex<double>;

/// Lattice displacement (u, v). Keys every coupling, chi and moment map.
struct Shift {
  int u = 0;
  int v = 0;

  friend auto operator<=>(const Shift&, const Shift&) = default;

  Shift operator-() const { return {-u, -v}; }
  Shift operator+(Shift o) const { return {u + o.u, v + o.v}; }
  Shift operator-(Shift o) const { return {u - o.u, v - o.v}; }
  Shift scaled(int n) const { return {n * u, n * v}; }
  bool is_zero() const { return u == 0 && v == 0; }

  // Structure constant of [K_{u,v}, N_axis] = component(axis) K_{u,v}.
  int component(int axis) const { return axis == 1 ? u : v; }
};

/// Hopping strengths g^{(u,v)} in frequency units (energy / hbar).
///
/// Always symmetric under (u,v) -> (-u,-v); (0,0) is never a key. Entries may
/// carry g = 0 (the tight-binding constructor always fills the full Moore
/// neighbourhood); active() lists only the non-zero ones.
class CouplingSet {
 public:
  CouplingSet(double hbar, std::map<Shift, double> entries);

  /// Fills g^{(u,v)} for (u,v) in {-1,0,1}^2 \ {(0,0)} from the band widths.
  static CouplingSet tight_binding(double delta1, double delta2, double delta3,
                                   double hbar);

  /// Adds the (-u,-v) partner of every entry; conflicting duplicates throw.
  static CouplingSet symmetrized(double hbar, const std::map<Shift, double>& half);

  double hbar() const { return hbar_; }
  const std::map<Shift, double>& entries() const { return entries_; }
  bool contains(Shift s) const { return entries_.count(s) != 0; }
  double g(Shift s) const;

  std::vector<Shift> active() const;

  // True when every active entry lies in the Moore neighbourhood.
  bool nearest_neighbour_only() const;

  double delta1() const { return 4.0 * hbar_ * g({1, 0}); }
  double delta2() const { return 4.0 * hbar_ * g({0, 1}); }
  double delta3() const { return 4.0 * hbar_ * g({1, 1}); }

 private:
  double hbar_;
  std::map<Shift, double> entries_;
};

/// Time profile f(t) >= 0 of the field magnitude.
struct MagnitudeProfile {
  enum class Smoothness { smooth, piecewise };

  std::function<double(double)> f;
  // Points where f or its derivatives jump; quadrature splits there.
  std::vector<double> breakpoints;
  Smoothness smoothness = Smoothness::smooth;
};

/// Field f = F/hbar with a fixed reduced direction (q, r).
class FieldSpec {
 public:
  FieldSpec(int q, int r, double magnitude);
  FieldSpec(int q, int r, MagnitudeProfile profile);

  int q() const { return q_; }
  int r() const { return r_; }
  double direction_norm() const;  // sqrt(q^2 + r^2)

  bool is_constant() const { return std::holds_alternative<double>(magnitude_); }

  // Throws TimeDependentField for a profile.
  double magnitude() const;
  double magnitude_at(double t) const;
  const MagnitudeProfile* profile() const { return std::get_if<MagnitudeProfile>(&magnitude_); }

  // (f1, f2) = f(t) (q, r) / sqrt(q^2 + r^2)
  std::pair<double, double> components_at(double t) const;

 private:
  int q_;
  int r_;
  std::variant<double, MagnitudeProfile> magnitude_;
};

/// Reduces real field components to a coprime direction via continued
/// fractions (denominators <= 64) and a constant magnitude.
FieldSpec reduce_direction(double f1, double f2);

/// Square L x L window with periodic wrap; site indices run over
/// {-L/2, ..., L/2 - 1} on both axes.
class LatticeWindow {
 public:
  explicit LatticeWindow(int L);

  int size() const { return L_; }
  int lo() const { return -L_ / 2; }
  int hi() const { return L_ / 2 - 1; }
  std::size_t sites() const { return static_cast<std::size_t>(L_) * L_; }

  // Signed index congruent to i mod L.
  int wrap(int i) const {
    int w = (i - lo()) % L_;
    if (w < 0) w += L_;
    return w + lo();
  }
  std::size_t site(int m, int n) const {
    return static_cast<std::size_t>(wrap(m) - lo()) * L_ + static_cast<std::size_t>(wrap(n) - lo());
  }
  // Quasimomentum of storage offset p in [0, L): 2 pi p / L.
  double quasimomentum(int p) const;

  friend bool operator==(const LatticeWindow&, const LatticeWindow&) = default;

 private:
  int L_;
};

/// Amplitudes c_{m,n}, row-major with m as the slow index.
class LatticeState {
 public:
  LatticeState(LatticeWindow window, std::vector<cplx> amplitudes);

  /// Rescales the amplitudes to unit norm.
  static LatticeState normalized(LatticeWindow window, std::vector<cplx> amplitudes);
  static LatticeState point(LatticeWindow window, int m, int n);

  const LatticeWindow& window() const { return window_; }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }

  cplx at(int m, int n) const { return amps_[window_.site(m, n)]; }
  cplx& at(int m, int n) { return amps_[window_.site(m, n)]; }

  double norm_squared() const;

 private:
  LatticeWindow window_;
  std::vector<cplx> amps_;
};

struct GaussianSpec {
  double sigma = 1.0;
  double k1 = 0.0;
  double k2 = 0.0;
  int centre_m = 0;
  int centre_n = 0;
};

/// State-dependent constants at t = 0 entering every closed-form observable.
struct InitialMoments {
  std::map<Shift, cplx> K;  // <K_{u,v}>
  std::map<int, cplx> J;    // v -> <J_1 K_2^v>,  J_1 = [N_1, K_1]_+
  std::map<int, cplx> L;    // u -> <K_1^u J_2>,  J_2 = [N_2, K_2]_+
  double N1_0 = 0.0;
  double N2_0 = 0.0;
  double N1sq_0 = 0.0;
  double N2sq_0 = 0.0;

  // Lookups fall back to the conjugate partner; (0,0) is the unit norm.
  // Throw MissingMoment when neither is stored.
  cplx k(Shift s) const;
  cplx j(int v) const;
  cplx l(int u) const;
};

LatticeState gaussian_state(const GaussianSpec& spec, const LatticeWindow& window);

/// Probability in the outermost two-site ring of the window.
double boundary_occupancy(const LatticeState& state);

inline constexpr double kBoundaryWarnThreshold = 1e-8;
inline constexpr double kBoundaryErrorThreshold = 1e-4;

/// <K_{u,v}> = sum c*_{m,n} c_{m+u,n+v} with periodic wrap. Warns through
/// `sink` when the boundary ring holds more than kBoundaryWarnThreshold.
cplx expectation_K(const LatticeState& state, int u, int v, const WarningSink& sink = {});

double expectation_N(const LatticeState& state, int axis);
double expectation_N2(const LatticeState& state, int axis);

/// <J_1 K_2^v> and <K_1^u J_2>. The anticommutator weight is
/// m + wrap(m+1), which is 2m+1 everywhere except across the seam.
cplx expectation_J(const LatticeState& state, int v);
cplx expectation_L(const LatticeState& state, int u);

/// Indices of <K> needed by the first and second moment formulas of
/// `couplings`: its active entries plus every pairwise sum a+b with
/// a, b both moving along a common axis. (0,0) is excluded.
std::vector<Shift> required_moment_indices(const CouplingSet& couplings);

InitialMoments initial_moments(const LatticeState& state, const CouplingSet& couplings,
                               const WarningSink& sink = {});

}  // namespace bloch2d
