#include "bloch2d/fit.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "bloch2d/phases.hpp"

namespace bloch2d {

TrendFit fit_trend(std::span<const double> t, std::span<const double> y, int degree, double omega,
                   int harmonics, bool modulated) {
  if (t.size() != y.size()) throw InvalidArgument("fit: time and value series differ in length");
  if (degree < 0 || harmonics < 0) throw InvalidArgument("fit: negative degree or harmonic count");
  const Eigen::Index cols = (degree + 1) + 2 * harmonics * (modulated ? 2 : 1);
  const Eigen::Index rows = static_cast<Eigen::Index>(t.size());
  if (rows < cols + 1) throw InvalidArgument("fit: not enough samples for the model");
  if (harmonics > 0 && !(omega > 0.0)) throw InvalidArgument("fit: harmonics need omega > 0");

  const double scale = std::max(std::abs(t.front()), std::abs(t.back()));
  if (!(scale > 0.0)) throw InvalidArgument("fit: time series has zero span");
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double s = t[i] / scale;
    Eigen::Index c = 0;
    double power = 1.0;
    for (int p = 0; p <= degree; ++p, power *= s) a(i, c++) = power;
    for (int h = 1; h <= harmonics; ++h) {
      const double cs = std::cos(h * omega * t[i]);
      const double sn = std::sin(h * omega * t[i]);
      a(i, c++) = cs;
      a(i, c++) = sn;
      if (modulated) {
        a(i, c++) = s * cs;
        a(i, c++) = s * sn;
      }
    }
    b(i) = y[i];
  }
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);

  TrendFit out;
  double power = 1.0;
  for (int p = 0; p <= degree; ++p, power *= scale) out.trend.push_back(x(p) / power);
  const double spread = (b.array() - b.mean()).matrix().norm();
  const double resid = (a * x - b).norm();
  out.relative_residual = spread > 0.0 ? resid / spread : resid;
  return out;
}

int max_harmonic(const CouplingSet& couplings, const FieldSpec& field) {
  int h = 0;
  for (Shift s : couplings.active()) h = std::max(h, std::abs(field_projection(s, field)));
  return h;
}

DriftFit fit_drift(std::span<const double> t, std::span<const double> n1,
                   std::span<const double> n2, double omega, int harmonics) {
  const TrendFit a = fit_trend(t, n1, 1, omega, harmonics, false);
  const TrendFit b = fit_trend(t, n2, 1, omega, harmonics, false);
  return {a.trend[1], b.trend[1], std::max(a.relative_residual, b.relative_residual)};
}

DispersionFit fit_dispersion(std::span<const double> t, std::span<const double> var, double omega,
                             int harmonics) {
  const TrendFit f = fit_trend(t, var, 2, omega, harmonics, true);
  return {f.trend[2], f.relative_residual};
}

}  // namespace bloch2d
