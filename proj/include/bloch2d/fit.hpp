#pragma once

#include <span>
#include <vector>

#include "bloch2d/model.hpp"

namespace bloch2d {

/// Least-squares fit of y(t) to a polynomial trend of `degree` plus
/// harmonics cos(h w t), sin(h w t) for h = 1..harmonics. With
/// `modulated` the harmonics also appear multiplied by t, which is the
/// structure of a variance whose linear term oscillates.
struct TrendFit {
  std::vector<double> trend;  // coefficient of t^p, p = 0..degree
  double relative_residual = 0.0;  // ||y - fit|| / ||y - mean(y)||
};

TrendFit fit_trend(std::span<const double> t, std::span<const double> y, int degree, double omega,
                   int harmonics, bool modulated);

/// Largest |uq + vr| over the active couplings; every first moment is a
/// combination of these Bloch harmonics.
int max_harmonic(const CouplingSet& couplings, const FieldSpec& field);

struct DriftFit {
  double vx = 0.0;
  double vy = 0.0;
  double residual = 0.0;  // larger of the two axis residuals
};

/// Drift velocity from <N_1>(t), <N_2>(t): linear trend plus Bloch harmonics.
DriftFit fit_drift(std::span<const double> t, std::span<const double> n1,
                   std::span<const double> n2, double omega, int harmonics);

struct DispersionFit {
  double coefficient = 0.0;  // t^2
  double residual = 0.0;
};

/// Quadratic growth of a variance: trend of degree 2 with plain and
/// t-modulated harmonics up to `harmonics`.
DispersionFit fit_dispersion(std::span<const double> t, std::span<const double> var, double omega,
                             int harmonics);

}  // namespace bloch2d
