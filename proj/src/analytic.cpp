#include "bloch2d/analytic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace bloch2d {

namespace {

// chi = rho exp(-i theta) with rho >= 0.
struct Hop {
  double rho = 0.0;
  double theta = 0.0;
};

Hop polar_hop(const FieldSpec& field, double omega, Shift s, cplx value, double t) {
  const ChiPolar p = chi_polar(value, s.u, s.v, field.q(), field.r(), omega, t);
  if (!p.phase_check) {
    std::ostringstream os;
    os << "phase of chi^(" << s.u << "," << s.v << ") = " << p.phase
       << " matches neither -(uq+vr) w_B t/2 nor its pi shift at t = " << t;
    throw PhaseMismatch(os.str());
  }
  return {p.modulus, -p.phase};
}

void require_moore(const CouplingSet& couplings, const char* what) {
  if (!couplings.nearest_neighbour_only()) {
    throw UnsupportedCouplingSet(std::string(what) +
                                 " needs couplings inside the nearest-neighbour square");
  }
}

void require_separable(const CouplingSet& couplings) {
  for (Shift s : couplings.active()) {
    if (!(std::abs(s.u) + std::abs(s.v) == 1)) {
      std::ostringstream os;
      os << "separable closed forms need axis-only couplings; (" << s.u << "," << s.v
         << ") is active";
      throw UnsupportedCouplingSet(os.str());
    }
  }
}

double omega_of(const FieldSpec& field) {
  if (!field.is_constant()) throw TimeDependentField("closed form needs a constant field");
  return bloch_frequency(field);
}

// <[N_axis, K_a]_+> for a hop with component +1 along axis.
cplx anticommutator(const InitialMoments& m, Shift a, int axis) {
  return axis == 1 ? m.j(a.v) : m.l(a.u);
}

// Three representative hops along `axis` (component +1): the axis hop and the
// two diagonals, in the order A, B = A + other axis, C = A - other axis.
std::array<Shift, 3> representatives(int axis) {
  if (axis == 1) return {Shift{1, 0}, Shift{1, 1}, Shift{1, -1}};
  return {Shift{0, 1}, Shift{1, 1}, Shift{-1, 1}};
}

double tb_second_moment(const InitialMoments& m, const FieldSpec& field,
                        const CouplingSet& couplings, double t, int axis) {
  require_moore(couplings, "explicit second moment");
  const double omega = omega_of(field);
  const ChiTable chis = chi(field, couplings, t);
  const auto reps = representatives(axis);
  std::array<Hop, 3> h{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (couplings.g(reps[i]) != 0.0) h[i] = polar_hop(field, omega, reps[i], chis.at(reps[i]), t);
  }
  const auto [A, B, C] = reps;
  const auto [hA, hB, hC] = h;

  auto breathing = [&](Shift a, Hop x) {
    if (x.rho == 0.0) return 0.0;
    const cplx k2 = m.k(a.scaled(2));
    return 2.0 * x.rho * x.rho * (1.0 - std::abs(k2) * std::cos(2.0 * x.theta - std::arg(k2)));
  };
  auto spread = [&](Shift a, Hop x) {
    if (x.rho == 0.0) return 0.0;
    const cplx j = anticommutator(m, a, axis);
    return 2.0 * x.rho * std::abs(j) * std::sin(x.theta - std::arg(j));
  };
  // -4 rho_a rho_b |K_{a+b}| cos(theta_a + theta_b - kappa_{a+b})
  auto sum_term = [&](Shift a, Hop x, Shift b, Hop y) {
    if (x.rho == 0.0 || y.rho == 0.0) return 0.0;
    const cplx k = m.k(a + b);
    return -4.0 * x.rho * y.rho * std::abs(k) * std::cos(x.theta + y.theta - std::arg(k));
  };
  // +4 rho_a rho_b |K_{a-b}| cos(theta_a - theta_b - kappa_{a-b})
  auto diff_term = [&](Shift a, Hop x, Shift b, Hop y) {
    if (x.rho == 0.0 || y.rho == 0.0) return 0.0;
    const cplx k = m.k(a - b);
    return 4.0 * x.rho * y.rho * std::abs(k) * std::cos(x.theta - y.theta - std::arg(k));
  };

  double out = axis == 1 ? m.N1sq_0 : m.N2sq_0;
  out += breathing(A, hA) + breathing(B, hB) + breathing(C, hC);
  out += spread(A, hA) + spread(B, hB) + spread(C, hC);
  out += sum_term(A, hA, B, hB);
  out += diff_term(B, hB, A, hA);
  out += sum_term(B, hB, C, hC);
  out += diff_term(A, hA, C, hC);
  out += sum_term(A, hA, C, hC);
  out += diff_term(B, hB, C, hC);
  return out;
}

// Signed amplitude s and phase theta of chi for an axis hop: chi = s e^{-i theta}.
std::pair<double, double> separable_hop(double g, int w, double omega, double t) {
  if (w == 0) return {g * t, 0.0};
  const double half = 0.5 * w * omega * t;
  return {2.0 * g / (w * omega) * std::sin(half), half};
}

}  // namespace

ObservableSample make_sample(double t, double n1, double n2, double n1sq, double n2sq) {
  return {t, n1, n2, n1sq, n2sq, n1sq - n1 * n1, n2sq - n2 * n2};
}

std::pair<double, double> analytic_N(const InitialMoments& moments, const CouplingSet& couplings,
                                     const ChiTable& chis) {
  double n1 = moments.N1_0;
  double n2 = moments.N2_0;
  for (Shift s : couplings.active()) {
    const double term = std::imag(chis.at(s) * moments.k(s));
    n1 -= s.u * term;
    n2 -= s.v * term;
  }
  return {n1, n2};
}

std::pair<double, double> analytic_N(const InitialMoments& moments, const FieldSpec& field,
                                     const CouplingSet& couplings, double t) {
  return analytic_N(moments, couplings, chi(field, couplings, t));
}

std::pair<double, double> analytic_N_tight_binding(const InitialMoments& moments,
                                                   const FieldSpec& field,
                                                   const CouplingSet& couplings, double t) {
  require_moore(couplings, "tight-binding first moments");
  const double omega = omega_of(field);
  const ChiTable chis = chi(field, couplings, t);
  auto term = [&](Shift s) {
    if (couplings.g(s) == 0.0) return 0.0;
    const Hop h = polar_hop(field, omega, s, chis.at(s), t);
    if (h.rho == 0.0) return 0.0;
    const cplx k = moments.k(s);
    return 2.0 * h.rho * std::abs(k) * std::sin(h.theta - std::arg(k));
  };
  const double t10 = term({1, 0});
  const double t01 = term({0, 1});
  const double t11 = term({1, 1});
  const double t1m = term({1, -1});
  return {moments.N1_0 + t10 + t11 + t1m, moments.N2_0 + t01 + t11 - t1m};
}

std::pair<double, double> analytic_N_separable(const InitialMoments& moments,
                                               const FieldSpec& field,
                                               const CouplingSet& couplings, double t) {
  require_separable(couplings);
  const double omega = omega_of(field);
  auto axis = [&](Shift s, int w, double n0) {
    const double g = couplings.g(s);
    if (g == 0.0) return n0;
    const cplx k = moments.k(s);
    const double kk = std::arg(k);
    if (w == 0) return n0 - 2.0 * g * t * std::abs(k) * std::sin(kk);
    return n0 + 2.0 * g / (w * omega) * std::abs(k) * (std::cos(kk) - std::cos(w * omega * t - kk));
  };
  return {axis({1, 0}, field.q(), moments.N1_0), axis({0, 1}, field.r(), moments.N2_0)};
}

double analytic_N1sq(const InitialMoments& moments, const FieldSpec& field,
                     const CouplingSet& couplings, double t) {
  return tb_second_moment(moments, field, couplings, t, 1);
}

double analytic_N2sq(const InitialMoments& moments, const FieldSpec& field,
                     const CouplingSet& couplings, double t) {
  return tb_second_moment(moments, field, couplings, t, 2);
}

std::pair<double, double> heisenberg_N_sq(const InitialMoments& moments,
                                          const CouplingSet& couplings, const ChiTable& chis) {
  require_moore(couplings, "Heisenberg second moments");
  const auto active = couplings.active();
  std::array<double, 2> out{moments.N1sq_0, moments.N2sq_0};
  for (int axis = 1; axis <= 2; ++axis) {
    cplx acc = 0.0;
    for (Shift a : active) {
      const int ea = a.component(axis);
      if (ea == 0) continue;
      const cplx ca = chis.at(a);
      // <[N, K_a]_+> for a component -1 hop is the conjugate of its partner's.
      const cplx anti = ea == 1 ? anticommutator(moments, a, axis)
                                : std::conj(anticommutator(moments, -a, axis));
      acc += cplx(0.0, 1.0) * double(ea) * ca * anti;
      for (Shift b : active) {
        const int eb = b.component(axis);
        if (eb == 0) continue;
        acc -= double(ea * eb) * ca * chis.at(b) * moments.k(a + b);
      }
    }
    out[axis - 1] += acc.real();
  }
  return {out[0], out[1]};
}

std::pair<double, double> analytic_Nsq_separable(const InitialMoments& moments,
                                                 const FieldSpec& field,
                                                 const CouplingSet& couplings, double t) {
  require_separable(couplings);
  const double omega = omega_of(field);
  auto axis = [&](Shift s, int w, double nsq0, cplx anti) {
    const double g = couplings.g(s);
    if (g == 0.0) return nsq0;
    const auto [amp, theta] = separable_hop(g, w, omega, t);
    const cplx k2 = moments.k(s.scaled(2));
    return nsq0 + 2.0 * amp * amp * (1.0 - std::abs(k2) * std::cos(2.0 * theta - std::arg(k2))) +
           2.0 * amp * std::abs(anti) * std::sin(theta - std::arg(anti));
  };
  const double n1sq = couplings.g({1, 0}) != 0.0
                          ? axis({1, 0}, field.q(), moments.N1sq_0, moments.j(0))
                          : moments.N1sq_0;
  const double n2sq = couplings.g({0, 1}) != 0.0
                          ? axis({0, 1}, field.r(), moments.N2sq_0, moments.l(0))
                          : moments.N2sq_0;
  return {n1sq, n2sq};
}

std::pair<double, double> separable_variances(const InitialMoments& moments,
                                              const FieldSpec& field,
                                              const CouplingSet& couplings, double t) {
  require_separable(couplings);
  const double omega = omega_of(field);
  auto axis = [&](Shift s, int w, double n0, double nsq0, auto anti_fn) {
    const double var0 = nsq0 - n0 * n0;
    const double g = couplings.g(s);
    if (g == 0.0) return var0;
    const auto [amp, theta] = separable_hop(g, w, omega, t);
    const cplx k = moments.k(s);
    const cplx k2 = moments.k(s.scaled(2));
    const cplx anti = anti_fn();
    const double sk = std::sin(theta - std::arg(k));
    return var0 +
           2.0 * amp * amp *
               (1.0 - std::abs(k2) * std::cos(2.0 * theta - std::arg(k2)) -
                2.0 * std::norm(k) * sk * sk) +
           2.0 * amp * (std::abs(anti) * std::sin(theta - std::arg(anti)) - 2.0 * std::abs(k) * n0 * sk);
  };
  return {axis({1, 0}, field.q(), moments.N1_0, moments.N1sq_0, [&] { return moments.j(0); }),
          axis({0, 1}, field.r(), moments.N2_0, moments.N2sq_0, [&] { return moments.l(0); })};
}

DriftVelocity drift_velocity(const InitialMoments& moments, const FieldSpec& field,
                             const CouplingSet& couplings) {
  if (!field.is_constant()) throw TimeDependentField("drift velocity needs a constant field");
  DriftVelocity v;
  for (Shift s : couplings.active()) {
    if (field.magnitude() != 0.0 && field_projection(s, field) != 0) continue;
    const double term = couplings.g(s) * std::imag(moments.k(s));
    v.vx -= s.u * term;
    v.vy -= s.v * term;
  }
  return v;
}

PeriodicityVerdict periodicity_condition(double k1, double k2, int q, int r) {
  PeriodicityVerdict out;
  out.kappa_orth = k1 * r - k2 * q;
  const double residue = std::remainder(out.kappa_orth, std::numbers::pi);
  out.periodic = std::abs(residue) <= 1e-9;
  return out;
}

double dispersion_bracket(const InitialMoments& moments, const FieldSpec& field) {
  const Shift a{field.r(), -field.q()};
  const cplx k = moments.k(a);
  const cplx k2 = moments.k(a.scaled(2));
  const double s = std::sin(std::arg(k));
  return 1.0 - std::abs(k2) * std::cos(std::arg(k2)) - 2.0 * std::norm(k) * s * s;
}

double dispersion_coefficient(const InitialMoments& moments, const FieldSpec& field,
                              const CouplingSet& couplings) {
  const int q = field.q();
  const int r = field.r();
  const int qr2 = q * q + r * r;
  std::vector<std::pair<Shift, int>> drifting;  // shift and its multiple of (r, -q)
  bool any_key = false;
  for (const auto& [s, g] : couplings.entries()) {
    if (field_projection(s, field) != 0) continue;
    any_key = true;
    if (g == 0.0) continue;
    drifting.emplace_back(s, (s.u * r - s.v * q) / qr2);
  }
  if (!any_key) {
    std::ostringstream os;
    os << "no coupling moves orthogonally to the field direction (" << q << "," << r << ")";
    throw NotDivergentDirection(os.str());
  }
  // X = i sum_a n_a g_a K_a is the generator of the secular part of P(t).
  cplx x2 = 0.0;
  cplx x1 = 0.0;
  for (const auto& [a, na] : drifting) {
    const double ga = couplings.g(a);
    x1 += cplx(0.0, 1.0) * double(na) * ga * moments.k(a);
    for (const auto& [b, nb] : drifting) {
      x2 -= double(na * nb) * ga * couplings.g(b) * moments.k(a + b);
    }
  }
  return x2.real() - x1.real() * x1.real();
}

std::vector<ObservableSample> analytic_trajectory(const InitialMoments& moments,
                                                  const FieldSpec& field,
                                                  const CouplingSet& couplings,
                                                  std::span<const double> t_grid) {
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw InvalidArgument("time grid must be non-negative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) {
      throw InvalidArgument("time grid must be strictly increasing");
    }
  }
  std::vector<ObservableSample> out;
  out.reserve(t_grid.size());
  const bool closed = field.is_constant() && field.magnitude() != 0.0;
  std::optional<PhaseIntegrator> integ;
  if (!field.is_constant()) integ.emplace(field, couplings);
  for (double t : t_grid) {
    ChiTable chis;
    if (integ) {
      integ->advance_to(t);
      chis = integ->table();
    } else {
      chis = chi(field, couplings, t);
    }
    const auto [n1, n2] = analytic_N(moments, couplings, chis);
    double n1sq = 0.0;
    double n2sq = 0.0;
    if (closed) {
      n1sq = analytic_N1sq(moments, field, couplings, t);
      n2sq = analytic_N2sq(moments, field, couplings, t);
    } else {
      std::tie(n1sq, n2sq) = heisenberg_N_sq(moments, couplings, chis);
    }
    out.push_back(make_sample(t, n1, n2, n1sq, n2sq));
  }
  return out;
}

}  // namespace bloch2d
