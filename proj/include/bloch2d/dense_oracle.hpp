#pragma once

#include <Eigen/Dense>

#include "bloch2d/model.hpp"

namespace bloch2d {

inline constexpr std::size_t kDenseOracleMaxSites = 256;

using DenseMatrix = Eigen::MatrixXcd;

/// Full Hamiltonian sum g K_{u,v} + f1 N_1 + f2 N_2 on the periodic window,
/// in window storage order. Throws WindowTooLarge above 256 sites and
/// TimeDependentField for a profile.
DenseMatrix dense_hamiltonian(const LatticeWindow& window, const FieldSpec& field,
                              const CouplingSet& couplings);

struct DenseEvolution {
  LatticeState state;
  // ||psi_eig - psi_pade||_2 between the two exponential algorithms.
  double cross_check = 0.0;
};

/// exp(-i H t) psi_0 computed from the spectral decomposition of H and from
/// scaling-and-squaring Pade; throws Error if they disagree by more than 1e-10.
DenseEvolution dense_evolve(const LatticeWindow& window, const FieldSpec& field,
                            const CouplingSet& couplings, double t,
                            const LatticeState& initial);

LatticeState dense_oracle(const LatticeWindow& window, const FieldSpec& field,
                          const CouplingSet& couplings, double t, const LatticeState& initial);

}  // namespace bloch2d
