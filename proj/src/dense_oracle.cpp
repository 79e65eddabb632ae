#include "bloch2d/dense_oracle.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace bloch2d {

DenseMatrix dense_hamiltonian(const LatticeWindow& window, const FieldSpec& field,
                              const CouplingSet& couplings) {
  if (window.sites() > kDenseOracleMaxSites) {
    std::ostringstream os;
    os << "dense oracle supports at most " << kDenseOracleMaxSites << " sites, window has "
       << window.sites();
    throw WindowTooLarge(os.str());
  }
  if (!field.is_constant()) throw TimeDependentField("dense oracle needs a constant field");
  const auto [f1, f2] = field.components_at(0.0);
  const Eigen::Index n = static_cast<Eigen::Index>(window.sites());
  DenseMatrix h = DenseMatrix::Zero(n, n);
  for (int m = window.lo(); m <= window.hi(); ++m) {
    for (int k = window.lo(); k <= window.hi(); ++k) {
      const auto row = static_cast<Eigen::Index>(window.site(m, k));
      h(row, row) += f1 * m + f2 * k;
      // (K psi)_{m,n} = c_{m+u,n+v}
      for (const auto& [s, g] : couplings.entries()) {
        if (g == 0.0) continue;
        h(row, static_cast<Eigen::Index>(window.site(m + s.u, k + s.v))) += g;
      }
    }
  }
  return h;
}

DenseEvolution dense_evolve(const LatticeWindow& window, const FieldSpec& field,
                            const CouplingSet& couplings, double t,
                            const LatticeState& initial) {
  if (!(initial.window() == window)) throw InvalidArgument("initial state does not match the window");
  const DenseMatrix h = dense_hamiltonian(window, field, couplings);
  const Eigen::Index n = h.rows();
  Eigen::VectorXcd psi0(n);
  for (Eigen::Index i = 0; i < n; ++i) psi0(i) = initial.amplitudes()[static_cast<std::size_t>(i)];

  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(h);
  if (eig.info() != Eigen::Success) throw Error("dense oracle eigendecomposition failed");
  const Eigen::VectorXcd phases =
      (eig.eigenvalues().cast<cplx>() * cplx(0.0, -t)).array().exp().matrix();
  const Eigen::VectorXcd psi_eig =
      eig.eigenvectors() * phases.asDiagonal() * (eig.eigenvectors().adjoint() * psi0);

  const DenseMatrix u = (h * cplx(0.0, -t)).exp();
  const Eigen::VectorXcd psi_pade = u * psi0;

  const double gap = (psi_eig - psi_pade).norm();
  if (gap > 1e-10) {
    std::ostringstream os;
    os << "dense oracle exponentials disagree by " << gap << " at t = " << t;
    throw Error(os.str());
  }
  std::vector<cplx> amps(psi_eig.data(), psi_eig.data() + n);
  return {LatticeState(window, std::move(amps)), gap};
}

LatticeState dense_oracle(const LatticeWindow& window, const FieldSpec& field,
                          const CouplingSet& couplings, double t, const LatticeState& initial) {
  return dense_evolve(window, field, couplings, t, initial).state;
}

}  // namespace bloch2d
