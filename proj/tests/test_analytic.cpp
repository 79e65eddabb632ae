#include <doctest.h>

#include <numbers>
#include <random>

#include "bloch2d/analytic.hpp"
#include "random_cases.hpp"

using namespace bloch2d;

namespace {

const double kPi = std::numbers::pi;
const double kHbarRef = 2.81 / (2.0 * kPi);

using oracle::Case;
using oracle::random_case;
using oracle::dense_moments;

InitialMoments quiet_moments(const LatticeState& s, const CouplingSet& cs) {
  return initial_moments(s, cs, [](const Warning&) {});
}

}  // namespace

TEST_CASE("first and second moments match dense Heisenberg evaluation") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const Case c = random_case(rng);
    CAPTURE(i);
    const auto m = quiet_moments(c.state, c.couplings);
    const auto d = dense_moments(c);
    const auto [n1, n2] = analytic_N(m, c.field, c.couplings, c.t);
    const auto [p1, p2] = analytic_N_tight_binding(m, c.field, c.couplings, c.t);
    const double s1 = analytic_N1sq(m, c.field, c.couplings, c.t);
    const double s2 = analytic_N2sq(m, c.field, c.couplings, c.t);
    const auto [h1, h2] = heisenberg_N_sq(m, c.couplings, chi(c.field, c.couplings, c.t));
    CHECK(std::abs(n1 - d.n1) < 1e-8);
    CHECK(std::abs(n2 - d.n2) < 1e-8);
    CHECK(std::abs(p1 - d.n1) < 1e-8);
    CHECK(std::abs(p2 - d.n2) < 1e-8);
    CHECK(std::abs(s1 - d.n1sq) < 1e-8);
    CHECK(std::abs(s2 - d.n2sq) < 1e-8);
    CHECK(std::abs(h1 - d.n1sq) < 1e-8);
    CHECK(std::abs(h2 - d.n2sq) < 1e-8);
  }
}

TEST_CASE("axis-coupled closed forms agree with the general route") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const LatticeWindow w(128);
  for (auto [q, r] : {std::pair{1, 0}, {0, 1}, {1, 1}, {2, -1}, {3, 2}}) {
    const auto cs = CouplingSet::tight_binding(0.25, 0.4, 0.0, kHbarRef);
    const FieldSpec f(q, r, 0.37);
    const auto s = gaussian_state({4.0, 6 * unit(rng) - 3, 6 * unit(rng) - 3, 2, -3}, w);
    const auto m = quiet_moments(s, cs);
    for (double t : {0.0, 0.7, 13.1, 52.9}) {
      const auto [a1, a2] = analytic_N(m, f, cs, t);
      const auto [b1, b2] = analytic_N_separable(m, f, cs, t);
      CHECK(std::abs(a1 - b1) < 1e-12);
      CHECK(std::abs(a2 - b2) < 1e-12);
      const double s1 = analytic_N1sq(m, f, cs, t);
      const double s2 = analytic_N2sq(m, f, cs, t);
      const auto [c1, c2] = analytic_Nsq_separable(m, f, cs, t);
      CHECK(std::abs(s1 - c1) < 1e-12 * std::max(1.0, s1));
      CHECK(std::abs(s2 - c2) < 1e-12 * std::max(1.0, s2));
      const auto [v1, v2] = separable_variances(m, f, cs, t);
      CHECK(std::abs(v1 - (s1 - a1 * a1)) < 1e-12 * std::max(1.0, s1));
      CHECK(std::abs(v2 - (s2 - a2 * a2)) < 1e-12 * std::max(1.0, s2));
    }
  }
}

TEST_CASE("axis-coupled first moment is linear in t when the field has no component") {
  const LatticeWindow w(64);
  const auto cs = CouplingSet::tight_binding(0.25, 0.25, 0.0, 1.0);
  const FieldSpec f(0, 1, 0.5);
  const auto s = gaussian_state({3.0, 0.8, 0.1, 0, 0}, w);
  const auto m = quiet_moments(s, cs);
  const double t = 4.0;
  const cplx k = m.k({1, 0});
  const auto [n1, n2] = analytic_N_separable(m, f, cs, t);
  CHECK(n1 == doctest::Approx(-2 * cs.g({1, 0}) * t * std::abs(k) * std::sin(0.8)).epsilon(1e-12));
  CHECK(std::abs(n2 - analytic_N(m, f, cs, t).second) < 1e-12);
}

TEST_CASE("closed forms reject coupling sets outside their scope") {
  const LatticeWindow w(64);
  const auto s = gaussian_state({3.0, 0.0, 0.0, 0, 0}, w);
  const auto diag = CouplingSet::tight_binding(0.25, 0.25, 0.008, 1.0);
  const auto m = quiet_moments(s, diag);
  const FieldSpec f(1, 1, 0.3);
  CHECK_THROWS_AS(analytic_N_separable(m, f, diag, 1.0), UnsupportedCouplingSet);
  CHECK_THROWS_AS(separable_variances(m, f, diag, 1.0), UnsupportedCouplingSet);
  const auto longer = CouplingSet::symmetrized(1.0, {{{1, 0}, 0.1}, {{2, 0}, 0.05}});
  const auto ml = quiet_moments(s, longer);
  CHECK_THROWS_AS(analytic_N1sq(ml, f, longer, 1.0), UnsupportedCouplingSet);
  CHECK_THROWS_AS(heisenberg_N_sq(ml, longer, chi(f, longer, 1.0)), UnsupportedCouplingSet);
  const FieldSpec ramp(1, 1, MagnitudeProfile{[](double t) { return t; }, {}, {}});
  CHECK_THROWS_AS(analytic_N1sq(m, ramp, diag, 1.0), TimeDependentField);
}

TEST_CASE("first moments hold for longer-range couplings") {
  const LatticeWindow w(16);
  const auto cs = CouplingSet::symmetrized(1.0, {{{1, 0}, 0.02}, {{2, 1}, 0.01}, {{0, 1}, 0.015}});
  const FieldSpec f(1, 1, 1.5);
  const auto s = gaussian_state({0.7, 0.5, -0.4, 0, 0}, w);
  const auto m = quiet_moments(s, cs);
  const double t = 2.3;
  const auto h = oracle::hamiltonian(w, cs, f.components_at(0).first, f.components_at(0).second);
  const auto psi = oracle::evolve(h, t, oracle::vec(s));
  const auto [n1, n2] = analytic_N(m, f, cs, t);
  CHECK(std::abs(n1 - oracle::expect(oracle::position(w, 1), psi).real()) < 1e-8);
  CHECK(std::abs(n2 - oracle::expect(oracle::position(w, 2), psi).real()) < 1e-8);
}

TEST_CASE("drift velocity at the reference parameters") {
  const LatticeWindow w(512);
  const auto cs = CouplingSet::tight_binding(0.25, 0.25, 0.008, kHbarRef);
  const FieldSpec f(1, 1, 0.1 / kHbarRef);
  const auto s = gaussian_state({10 * kPi, kPi / 2, 0.0, 0, 0}, w);
  const auto m = quiet_moments(s, cs);
  CHECK(cs.g({1, -1}) == doctest::Approx(4.472e-3).epsilon(1e-3));
  CHECK(std::abs(m.k({1, -1})) == doctest::Approx(0.99975).epsilon(1e-5));
  const DriftVelocity v = drift_velocity(m, f, cs);
  // -2 g |K_{1,-1}| sin(kappa_{1,-1}) (1, -1)
  const double speed = 2 * cs.g({1, -1}) * std::abs(m.k({1, -1}));
  CHECK(v.vx == doctest::Approx(-speed).epsilon(1e-12));
  CHECK(v.vy == doctest::Approx(speed).epsilon(1e-12));
  CHECK(std::abs(v.vx) == doctest::Approx(8.94e-3).epsilon(1e-3));
  CHECK(std::abs(v.vx * f.q() + v.vy * f.r()) < 1e-18);
}

TEST_CASE("drift vanishes when the orthogonal phase is a multiple of pi") {
  const LatticeWindow w(256);
  const auto cs = CouplingSet::tight_binding(0.25, 0.25, 0.008, kHbarRef);
  const FieldSpec f(1, 1, 0.2);
  for (auto [k1, k2] : {std::pair{kPi, kPi}, {kPi / 2, -kPi / 2}}) {
    const auto m = quiet_moments(gaussian_state({10.0, k1, k2, 0, 0}, w), cs);
    const DriftVelocity v = drift_velocity(m, f, cs);
    CHECK(std::hypot(v.vx, v.vy) < 1e-15);
    CHECK(periodicity_condition(k1, k2, 1, 1).periodic);
  }
  CHECK_FALSE(periodicity_condition(kPi / 2, 0.0, 1, 1).periodic);
  CHECK(periodicity_condition(kPi / 2, 0.0, 1, 1).kappa_orth == doctest::Approx(kPi / 2));
  CHECK(periodicity_condition(0.3, 0.6, 1, 2).periodic);
}

TEST_CASE("dispersion coefficient") {
  const LatticeWindow w(256);
  const auto cs = CouplingSet::tight_binding(0.25, 0.25, 0.008, kHbarRef);
  const FieldSpec f(1, 1, 0.1 / kHbarRef);
  const auto s = gaussian_state({10.0, kPi, kPi, 0, 0}, w);
  const auto m = quiet_moments(s, cs);
  const double k22 = std::abs(oracle::gaussian_K(10.0, kPi, kPi, 2, -2));
  CHECK(dispersion_bracket(m, f) == doctest::Approx(1 - k22).epsilon(1e-10));
  const double g = cs.g({1, -1});
  CHECK(dispersion_coefficient(m, f, cs) == doctest::Approx(2 * g * g * (1 - k22)).epsilon(1e-10));

  for (double sigma : {1.0, 2.0, 5.0}) {
    const auto ms = quiet_moments(gaussian_state({sigma, 0.9, -0.3, 0, 0}, w), cs);
    const double bracket = dispersion_bracket(ms, f);
    CHECK(bracket > 0.0);
    CHECK(dispersion_coefficient(ms, f, cs) == doctest::Approx(2 * g * g * bracket).epsilon(1e-12));
  }

  CHECK_THROWS_AS(dispersion_coefficient(m, FieldSpec(2, 1, 0.3), cs), NotDivergentDirection);
  const auto sep = CouplingSet::tight_binding(0.25, 0.25, 0.0, kHbarRef);
  CHECK(dispersion_coefficient(quiet_moments(s, sep), f, sep) == 0.0);
}

TEST_CASE("trajectory grid must increase strictly") {
  const LatticeWindow w(64);
  const auto cs = CouplingSet::tight_binding(0.25, 0.25, 0.008, 1.0);
  const auto m = quiet_moments(gaussian_state({3.0, 0, 0, 0, 0}, w), cs);
  const FieldSpec f(1, 1, 0.4);
  const std::vector<double> bad{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(analytic_trajectory(m, f, cs, bad), InvalidArgument);
  const std::vector<double> good{0.0, 0.5, 2.0};
  const auto traj = analytic_trajectory(m, f, cs, good);
  REQUIRE(traj.size() == 3);
  CHECK(traj[0].n1 == doctest::Approx(m.N1_0));
  CHECK(traj[0].var1 == doctest::Approx(m.N1sq_0 - m.N1_0 * m.N1_0));
  CHECK(traj[2].var2 == doctest::Approx(traj[2].n2sq - traj[2].n2 * traj[2].n2));
}

TEST_CASE("time-dependent trajectories use the Heisenberg route") {
  const LatticeWindow w(64);
  const auto cs = CouplingSet::tight_binding(0.25, 0.25, 0.008, 1.0);
  const auto m = quiet_moments(gaussian_state({3.0, 0.4, 1.0, 0, 0}, w), cs);
  const FieldSpec constant(1, 2, 0.4);
  const FieldSpec flat(1, 2, MagnitudeProfile{[](double) { return 0.4; }, {}, {}});
  const std::vector<double> grid{0.0, 3.0, 11.0};
  const auto a = analytic_trajectory(m, constant, cs, grid);
  const auto b = analytic_trajectory(m, flat, cs, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(std::abs(a[i].n1 - b[i].n1) < 1e-9);
    CHECK(std::abs(a[i].n2sq - b[i].n2sq) < 1e-9);
  }
}
