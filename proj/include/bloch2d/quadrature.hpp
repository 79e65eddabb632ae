#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "bloch2d/errors.hpp"

namespace bloch2d {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  std::size_t max_panels = 20000;
};

/// Globally adaptive 15-point Gauss-Kronrod integration to an absolute
/// tolerance. The panel with the largest error estimate is bisected until
/// the summed estimate drops below `abs_tol`; running out of panels throws
/// QuadratureFailure. Interior `breakpoints` always start a new panel.
template <class T, class F>
T integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {},
                     std::span<const double> breakpoints = {}) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (b == a) return T{};
  if (b < a) return -integrate_adaptive<T>(f, b, a, opt, breakpoints);

  struct Panel {
    double lo, hi;
    T value;
    double error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  auto eval = [&](double lo, double hi) {
    double err = 0.0;
    const T v = GK::integrate(f, lo, hi, 0, 0.0, &err);
    // A single panel reports its error on the reference interval [-1, 1].
    return Panel{lo, hi, v, err * 0.5 * (hi - lo)};
  };

  std::vector<double> edges{a};
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::priority_queue<Panel> heap;
  T total{};
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = eval(edges[i], edges[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }
  std::size_t panels = heap.size();
  while (total_err > opt.abs_tol) {
    if (panels >= opt.max_panels) {
      std::ostringstream os;
      os << "adaptive quadrature on [" << a << ", " << b << "] stalled at error estimate "
         << total_err << " (tolerance " << opt.abs_tol << ", " << panels << " panels)";
      throw QuadratureFailure(os.str());
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      throw QuadratureFailure("adaptive quadrature cannot subdivide below machine resolution");
    }
    Panel left = eval(worst.lo, mid);
    Panel right = eval(mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum to avoid drift from incremental updates.
  T sum{};
  while (!heap.empty()) {
    sum += heap.top().value;
    heap.pop();
  }
  return sum;
}

}  // namespace bloch2d
