#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bloch2d/model.hpp"
#include "bloch2d/phases.hpp"

namespace bloch2d {

struct ObservableSample {
  double t = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  double n1sq = 0.0;
  double n2sq = 0.0;
  double var1 = 0.0;
  double var2 = 0.0;
};

ObservableSample make_sample(double t, double n1, double n2, double n1sq, double n2sq);

/// Centre-of-mass drift in sites per unit time; always orthogonal to (q, r).
struct DriftVelocity {
  double vx = 0.0;
  double vy = 0.0;
};

// --- first moments --------------------------------------------------------

/// <N_j>_t = <N_j>_0 + i sum_{(u,v)} eps_{u,v,j} chi^{(u,v)} <K_{u,v}>,
/// evaluated for any coupling set and any chi table (constant or
/// time-dependent field).
std::pair<double, double> analytic_N(const InitialMoments& moments, const CouplingSet& couplings,
                                     const ChiTable& chis);
std::pair<double, double> analytic_N(const InitialMoments& moments, const FieldSpec& field,
                                     const CouplingSet& couplings, double t);

/// The nearest-neighbour sine expansions written in polar form
/// 2|chi||K| sin(theta - kappa). Constant field, Moore-neighbourhood sets.
std::pair<double, double> analytic_N_tight_binding(const InitialMoments& moments,
                                                   const FieldSpec& field,
                                                   const CouplingSet& couplings, double t);

/// Axis-coupled (separable) closed forms,
///   <N_1>_t = <N_1>_0 + 2 g/(q w_B) |K_10| [cos k_10 - cos(q w_B t - k_10)],
/// falling back to the linear law -2 g t |K_10| sin k_10 when q = 0.
/// Throws UnsupportedCouplingSet if any diagonal or longer-range coupling is active.
std::pair<double, double> analytic_N_separable(const InitialMoments& moments,
                                               const FieldSpec& field,
                                               const CouplingSet& couplings, double t);

// --- second moments -------------------------------------------------------

/// <N_1^2>_t term by term: three |chi|^2 breathing terms, three J terms and
/// six cross terms between pairs of axis-1 hops. Moore-neighbourhood sets,
/// constant non-zero field.
double analytic_N1sq(const InitialMoments& moments, const FieldSpec& field,
                     const CouplingSet& couplings, double t);
/// Mirror of analytic_N1sq under 1 <-> 2 (L moments replace J moments).
double analytic_N2sq(const InitialMoments& moments, const FieldSpec& field,
                     const CouplingSet& couplings, double t);

/// <N_j^2>_t from squaring the Heisenberg operator directly,
///   N_j(t)^2 = N_j^2 + i sum_a eps_a chi_a [N_j, K_a]_+ - sum_{a,b} eps_a eps_b chi_a chi_b K_{a+b}.
/// Works for any chi table; Moore-neighbourhood sets only.
std::pair<double, double> heisenberg_N_sq(const InitialMoments& moments,
                                          const CouplingSet& couplings, const ChiTable& chis);

/// Separable (Delta_3 = 0) second moments and variances.
std::pair<double, double> analytic_Nsq_separable(const InitialMoments& moments,
                                                 const FieldSpec& field,
                                                 const CouplingSet& couplings, double t);
std::pair<double, double> separable_variances(const InitialMoments& moments,
                                              const FieldSpec& field,
                                              const CouplingSet& couplings, double t);

// --- derived quantities ---------------------------------------------------

DriftVelocity drift_velocity(const InitialMoments& moments, const FieldSpec& field,
                             const CouplingSet& couplings);

struct PeriodicityVerdict {
  bool periodic = false;
  double kappa_orth = 0.0;  // k1 r - k2 q
};
PeriodicityVerdict periodicity_condition(double k1, double k2, int q, int r);

/// 1 - |K_{2r,-2q}| cos k_{2r,-2q} - 2 |K_{r,-q}|^2 sin^2 k_{r,-q}
double dispersion_bracket(const InitialMoments& moments, const FieldSpec& field);

/// t^2 coefficient of Var(P), P = (r N_1 - q N_2) / (q^2 + r^2) the position
/// counted in steps of the orthogonal lattice vector (r, -q). For a single
/// orthogonal pair this is 2 g^2 * dispersion_bracket. Throws
/// NotDivergentDirection when no coupling-set key satisfies uq + vr = 0.
double dispersion_coefficient(const InitialMoments& moments, const FieldSpec& field,
                              const CouplingSet& couplings);

std::vector<ObservableSample> analytic_trajectory(const InitialMoments& moments,
                                                  const FieldSpec& field,
                                                  const CouplingSet& couplings,
                                                  std::span<const double> t_grid);

}  // namespace bloch2d
