#pragma once

#include <vector>

#include "bloch2d/analytic.hpp"
#include "bloch2d/model.hpp"
#include "bloch2d/phases.hpp"

namespace bloch2d {

/// c_{m,n} <- exp(-i (eta1 m + eta2 n)) c_{m,n}
LatticeState apply_US(const LatticeState& state, const PhaseState& phase);
LatticeState apply_US(const LatticeState& state, const FieldSpec& field, double t);

/// exp(-i sum chi K_{u,v}) applied in quasimomentum space. Every entry of
/// `chis` needs its (-u,-v) partner; the overload taking a coupling set also
/// requires the table to cover every key of the set.
LatticeState apply_UI(const LatticeState& state, const ChiTable& chis);
LatticeState apply_UI(const LatticeState& state, const CouplingSet& couplings,
                      const ChiTable& chis);

struct Records {
  bool moments = true;
  // Var(P) with P = (r N_1 - q N_2) / (q^2 + r^2).
  bool orthogonal_variance = false;
};

struct PropagationPlan {
  LatticeWindow window;
  FieldSpec field;
  CouplingSet couplings;
  std::vector<double> t_grid;
  Records records{};
  // 0 picks the hardware concurrency.
  int threads = 1;
};

struct TrajectoryRecord {
  std::vector<ObservableSample> samples;
  LatticeState final_state;
  double boundary_max = 0.0;
  std::vector<double> orthogonal_variance;
};

/// Samples the exact state U_S(t) U_I(t) psi_0 at every grid time, each
/// evolved from t = 0. Throws BoundaryOverflow when the outer ring of the
/// window holds more than kBoundaryErrorThreshold at any sample.
TrajectoryRecord evolve(const PropagationPlan& plan, const LatticeState& initial,
                        const WarningSink& sink = {});

/// Fidelity |<a|b>|.
double overlap_modulus(const LatticeState& a, const LatticeState& b);
/// ||a - b||_2
double distance(const LatticeState& a, const LatticeState& b);

}  // namespace bloch2d
