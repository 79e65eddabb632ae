#pragma once

#include <algorithm>
#include <numbers>
#include <random>

#include "bloch2d/phases.hpp"
#include "oracles.hpp"

namespace oracle {

struct Case {
  bloch2d::LatticeWindow window{16};
  bloch2d::CouplingSet couplings = bloch2d::CouplingSet::tight_binding(0.25, 0.25, 0.008, 1.0);
  bloch2d::FieldSpec field{1, 1, 1.0};
  bloch2d::LatticeState state = bloch2d::LatticeState::point(bloch2d::LatticeWindow(16), 0, 0);
  double t = 0.0;
};

// A localized packet on a 16x16 window with the hopping small against the
// Bloch frequency, so the dense periodic evolution never reaches the seam.
inline Case random_case(std::mt19937_64& rng) {
  constexpr double pi = std::numbers::pi;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  static const std::pair<int, int> dirs[] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, 1}, {-1, 2}, {1, 2}};
  Case c;
  const auto [q, r] = dirs[static_cast<std::size_t>(unit(rng) * 7) % 7];
  const double hbar = 0.3 + unit(rng);
  const double d1 = 0.1 + 0.3 * unit(rng);
  const double d2 = 0.1 + 0.3 * unit(rng);
  const double d3 = 0.2 * unit(rng);
  c.couplings = bloch2d::CouplingSet::tight_binding(d1, d2, d3, hbar);
  const double gmax = std::max({d1, d2, d3}) / (4 * hbar);
  const double ratio = 0.02 + 0.04 * unit(rng);  // g / omega_B
  const double omega = gmax / ratio;
  c.field = bloch2d::FieldSpec(q, r, omega * std::hypot(q, r));
  c.state = bloch2d::gaussian_state(
      {0.6 + 0.3 * unit(rng), 2 * pi * unit(rng) - pi, 2 * pi * unit(rng) - pi, 0, 0}, c.window);
  c.t = unit(rng) * bloch2d::bloch_period(c.field);
  return c;
}

struct DenseMoments {
  double n1, n2, n1sq, n2sq;
};

inline DenseMoments dense_moments(const Case& c) {
  const auto [f1, f2] = c.field.components_at(0.0);
  const auto h = hamiltonian(c.window, c.couplings, f1, f2);
  const auto psi = evolve(h, c.t, vec(c.state));
  const auto n1 = position(c.window, 1);
  const auto n2 = position(c.window, 2);
  return {expect(n1, psi).real(), expect(n2, psi).real(), expect(n1 * n1, psi).real(),
          expect(n2 * n2, psi).real()};
}

}  // namespace oracle
