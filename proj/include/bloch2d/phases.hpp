#pragma once

#include <map>
#include <vector>

#include "bloch2d/model.hpp"

namespace bloch2d {

inline constexpr double kEtaTolerance = 1e-12;
inline constexpr double kChiTolerance = 1e-10;

/// Integrated field eta_t = (1/sqrt(q^2+r^2)) int_0^t f; eta1 = q eta, eta2 = r eta.
struct PhaseState {
  double t = 0.0;
  double eta = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
};

/// chi_t^{(u,v)} = g^{(u,v)} int_0^t exp(-i (uq+vr) eta_tau) dtau, one entry per
/// coupling-set key. Entries for (u,v) and (-u,-v) are exact conjugates.
class ChiTable {
 public:
  ChiTable() = default;
  ChiTable(double t, std::map<Shift, cplx> entries) : t_(t), entries_(std::move(entries)) {}

  double t() const { return t_; }
  const std::map<Shift, cplx>& entries() const { return entries_; }
  // Throws IncompleteChiTable.
  cplx at(Shift s) const;
  bool covers(const CouplingSet& couplings) const;

 private:
  double t_ = 0.0;
  std::map<Shift, cplx> entries_;
};

PhaseState eta(const FieldSpec& field, double t);

/// T_B = 2 pi sqrt(q^2 + r^2) / f. Throws TimeDependentField for a profile
/// and InvalidArgument for f = 0.
double bloch_period(const FieldSpec& field);
double bloch_frequency(const FieldSpec& field);

/// uq + vr, the harmonic carried by shift (u,v) under field direction (q,r).
inline int field_projection(Shift s, const FieldSpec& field) {
  return s.u * field.q() + s.v * field.r();
}

/// Closed form for constant fields, adaptive quadrature otherwise.
ChiTable chi(const FieldSpec& field, const CouplingSet& couplings, double t);

/// |chi| with the phase of chi checked against -(uq+vr) omega_B t / 2.
///
/// The modulus is kept non-negative. Where sin((uq+vr) omega_B t / 2) < 0 (or
/// g < 0) the extra pi sits in the phase, so `phase` is either the nominal
/// value or the nominal value + pi (mod 2 pi). `phase_check` is false when
/// neither matches within 1e-9; for |chi| below 1e-13 the check passes
/// vacuously and `phase` is the nominal value.
struct ChiPolar {
  double modulus = 0.0;
  double phase = 0.0;  // arg(chi)
  bool phase_check = true;
};
ChiPolar chi_polar(cplx chi_value, int u, int v, int q, int r, double omega_b, double t);

/// Incremental eta/chi integration for time-dependent magnitudes: advancing
/// from t_prev to t only integrates the new interval.
class PhaseIntegrator {
 public:
  PhaseIntegrator(const FieldSpec& field, const CouplingSet& couplings);

  // t must not decrease between calls.
  void advance_to(double t);

  PhaseState phase() const;
  ChiTable table() const;

 private:
  double eta_between(double t0, double eta0, double t1) const;

  FieldSpec field_;
  CouplingSet couplings_;
  double t_ = 0.0;
  double eta_ = 0.0;
  // int_0^t exp(-i w eta_tau) dtau for each non-negative harmonic w in use.
  std::map<int, cplx> phase_integrals_;
};

}  // namespace bloch2d
