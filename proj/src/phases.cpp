#include "bloch2d/phases.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "bloch2d/quadrature.hpp"

namespace bloch2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::span<const double> breakpoints_of(const FieldSpec& field) {
  if (const auto* p = field.profile()) return p->breakpoints;
  return {};
}

double integrate_magnitude(const FieldSpec& field, double a, double b, double tol) {
  return integrate_adaptive<double>([&](double x) { return field.magnitude_at(x); }, a, b,
                                    {tol, 20000}, breakpoints_of(field));
}

}  // namespace

cplx ChiTable::at(Shift s) const {
  auto it = entries_.find(s);
  if (it == entries_.end()) {
    std::ostringstream os;
    os << "chi table has no entry for (" << s.u << "," << s.v << ")";
    throw IncompleteChiTable(os.str());
  }
  return it->second;
}

bool ChiTable::covers(const CouplingSet& couplings) const {
  for (const auto& [s, g] : couplings.entries()) {
    if (!entries_.count(s)) return false;
  }
  return true;
}

PhaseState eta(const FieldSpec& field, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be non-negative");
  double e = 0.0;
  if (field.is_constant()) {
    e = field.magnitude() * t / field.direction_norm();
  } else {
    e = integrate_magnitude(field, 0.0, t, kEtaTolerance * field.direction_norm()) /
        field.direction_norm();
  }
  return {t, e, field.q() * e, field.r() * e};
}

double bloch_period(const FieldSpec& field) {
  const double f = field.magnitude();
  if (!(f > 0.0)) throw InvalidArgument("Bloch period needs a non-zero field");
  return kTwoPi * field.direction_norm() / f;
}

double bloch_frequency(const FieldSpec& field) { return kTwoPi / bloch_period(field); }

ChiTable chi(const FieldSpec& field, const CouplingSet& couplings, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("time must be non-negative");
  if (!field.is_constant()) {
    PhaseIntegrator integ(field, couplings);
    integ.advance_to(t);
    return integ.table();
  }

  const double f = field.magnitude();
  const double omega = f / field.direction_norm();  // omega_B; f = 0 handled by w*omega = 0
  std::map<Shift, cplx> out;
  for (const auto& [s, g] : couplings.entries()) {
    if (out.count(s)) continue;
    const int w = field_projection(s, field);
    cplx value;
    if (w == 0 || omega == 0.0) {
      value = g * t;
    } else {
      const double half = 0.5 * w * omega * t;
      value = 2.0 * g / (w * omega) * std::sin(half) * std::polar(1.0, -half);
    }
    out[s] = value;
    out[-s] = std::conj(value);
  }
  return ChiTable(t, std::move(out));
}

ChiPolar chi_polar(cplx chi_value, int u, int v, int q, int r, double omega_b, double t) {
  const double nominal = -0.5 * (u * q + v * r) * omega_b * t;
  ChiPolar out;
  out.modulus = std::abs(chi_value);
  if (out.modulus < 1e-13) {
    out.phase = nominal;
    return out;
  }
  out.phase = std::arg(chi_value);
  auto dist = [](double a, double b) {
    return std::abs(std::remainder(a - b, kTwoPi));
  };
  const double d0 = dist(out.phase, nominal);
  const double d1 = dist(out.phase, nominal + std::numbers::pi);
  out.phase_check = std::min(d0, d1) <= 1e-9;
  return out;
}

// ---------------------------------------------------------------------------

PhaseIntegrator::PhaseIntegrator(const FieldSpec& field, const CouplingSet& couplings)
    : field_(field), couplings_(couplings) {
  for (const auto& [s, g] : couplings_.entries()) {
    phase_integrals_[std::abs(field_projection(s, field_))] = 0.0;
  }
}

double PhaseIntegrator::eta_between(double t0, double eta0, double t1) const {
  if (field_.is_constant()) return eta0 + field_.magnitude() * (t1 - t0) / field_.direction_norm();
  return eta0 + integrate_magnitude(field_, t0, t1, kEtaTolerance * field_.direction_norm()) /
                    field_.direction_norm();
}

void PhaseIntegrator::advance_to(double t) {
  if (t < t_) throw InvalidArgument("phase integrator cannot step backwards in time");
  if (t == t_) return;
  const double t0 = t_;
  const double eta0 = eta_;
  auto bps = breakpoints_of(field_);
  for (auto& [w, acc] : phase_integrals_) {
    if (w == 0) {
      acc += t - t0;
      continue;
    }
    const int harmonic = w;
    auto integrand = [&](double tau) {
      return std::polar(1.0, -harmonic * eta_between(t0, eta0, tau));
    };
    acc += integrate_adaptive<cplx>(integrand, t0, t, {kChiTolerance * 0.1, 20000}, bps);
  }
  eta_ = eta_between(t0, eta0, t);
  t_ = t;
}

PhaseState PhaseIntegrator::phase() const {
  return {t_, eta_, field_.q() * eta_, field_.r() * eta_};
}

ChiTable PhaseIntegrator::table() const {
  std::map<Shift, cplx> out;
  for (const auto& [s, g] : couplings_.entries()) {
    if (out.count(s)) continue;
    const int w = field_projection(s, field_);
    cplx I = phase_integrals_.at(std::abs(w));
    if (w < 0) I = std::conj(I);
    out[s] = g * I;
    out[-s] = std::conj(g * I);
  }
  return ChiTable(t_, std::move(out));
}

}  // namespace bloch2d
