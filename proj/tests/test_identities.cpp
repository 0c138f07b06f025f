#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rfpme/differencing.hpp"
#include "rfpme/geometry.hpp"
#include "rfpme/identities.hpp"
#include "rfpme/pme.hpp"

using namespace rfpme;
using namespace rfpme::identities;
using std::numbers::pi;

namespace {

pme::PmeParams bump_params(double T, double dt, double a = 1.0) {
  pme::PmeParams p;
  p.a = a;
  p.T = T;
  p.dt = dt;
  p.u0.kind = pme::InitialData::Kind::Bump;
  p.u0.level = 1.0;
  p.u0.amplitude = 0.3;
  return p;
}

ManifoldState torus(std::size_t N) { return ManifoldState::flat_torus({2 * pi}, N); }
ManifoldState sphere(std::size_t N) { return ManifoldState::round_sphere(2, 1.0, N); }

// Residual levels of an identity on (h, dt) -> (h/2, dt/4) bump runs.
IdentityResidual study(const std::function<ManifoldState(std::size_t)>& make,
                       const std::function<IdentityResidual(const pme::Trajectory&)>& eval,
                       double a = 1.0, std::size_t N0 = 32, double dt0 = 2e-3) {
  const auto base = bump_params(0.064, dt0, a);
  return convergence_study(
      [&](std::size_t k) { return eval(refined_run(base, make, N0, k)); }, 3);
}

pme::Trajectory homogeneous_sphere(double a = 1.0) {
  pme::PmeParams p;
  p.a = a;
  p.T = 0.2;
  p.dt = 1e-4;
  p.store_every = 1;  // the oracles need O(dt^2) time differencing at dt = 1e-4
  return pme::run(p, sphere(64));
}

}  // namespace

TEST_CASE("L operator") {
  pme::PmeParams p = bump_params(0.1, 0.005);
  const auto traj = pme::run(p, torus(32));
  SUBCASE("spatially constant f on the static torus gives df/dt exactly") {
    const auto f = sample_history(traj, [](double, double t) { return 1.0 + t * t; });
    for (std::size_t j = 1; j + 1 < traj.size(); ++j)
      for (std::size_t i = 0; i < 32; i += 7)
        CHECK(L_operator(f, traj, i, j) == doctest::Approx(2.0 * traj.time(j)).epsilon(1e-12));
  }
  SUBCASE("time-independent f gives -(p-1) v Delta f") {
    const auto f = sample_history(traj, [](double s, double) { return std::sin(s); });
    for (std::size_t j = 1; j + 1 < traj.size(); ++j) {
      const auto expect = -(traj.p() - 1.0) * traj.v(j) * geometry::laplacian(f[j], traj.state(j));
      CHECK((L_operator(f, traj, j) - expect).max_abs() == 0.0);
    }
  }
  SUBCASE("L(v) is the rearranged pressure equation") {
    for (std::size_t j = 2; j + 2 < traj.size(); ++j) {
      const auto& m = traj.state(j);
      const auto residual = L_operator(traj.v_series(), traj, j) -
                            geometry::gradient_norm_sq(traj.v(j), m);
      CHECK(residual.max_abs() <= 1e-2);  // O(h^2) at h = 2 pi / 32
    }
  }
  SUBCASE("history length is validated") {
    std::vector<ScalarField> short_history(traj.v_series().begin(), traj.v_series().begin() + 2);
    CHECK_THROWS_AS(L_operator(short_history, traj, 1), std::invalid_argument);
  }
}

TEST_CASE("quotient rule") {
  const auto traj = pme::run(bump_params(0.1, 0.005), torus(32));
  const auto f = sample_history(traj, [](double s, double t) { return 2.0 + std::sin(s - t); });
  SUBCASE("f = g") { CHECK(quotient_rule_residual(f, f, traj).max_abs_residual <= 1e-12); }
  SUBCASE("g = 1 collapses exactly") {
    const auto one = sample_history(traj, [](double, double) { return 1.0; });
    CHECK(quotient_rule_residual(f, one, traj).max_abs_residual == 0.0);
  }
  SUBCASE("g must be positive") {
    const auto zero = sample_history(traj, [](double, double) { return 0.0; });
    CHECK_THROWS_AS(quotient_rule_residual(f, zero, traj), std::domain_error);
  }
  SUBCASE("manufactured fields converge at second order") {
    const auto r = study(torus, [](const pme::Trajectory& t) {
      const auto ff = sample_history(t, [](double s, double tt) { return 2.0 + std::sin(s - tt); });
      const auto gg = sample_history(
          t, [](double s, double tt) { return 3.0 + std::cos(2.0 * s) * std::exp(-tt); });
      return quotient_rule_residual(ff, gg, t);
    });
    MESSAGE("quotient order " << *r.measured_order << " residual " << r.max_abs_residual);
    CHECK(*r.measured_order >= 1.8);
  }
}

TEST_CASE("Proposition 2.1") {
  SUBCASE("constant v on the static torus: both sides vanish") {
    pme::PmeParams p;
    p.T = 0.1;
    p.dt = 0.01;
    const auto traj = pme::run(p, torus(16));
    CHECK(prop21_residual(traj, 1.0, 2.0, -1.0).max_abs_residual == 0.0);
  }
  SUBCASE("torus bump data converges for several (b, c)") {
    for (auto [b, c] : {std::pair{2.0, -1.0}, std::pair{1.0, 0.0}, std::pair{3.0, 0.5}}) {
      const auto r = study(torus, [b, c](const pme::Trajectory& t) {
        return prop21_residual(t, 1.0, b, c);
      });
      MESSAGE("prop21 b=" << b << " c=" << c << " order " << *r.measured_order << " residual "
                          << r.max_abs_residual);
      CHECK(*r.measured_order >= 1.8);
    }
  }
  SUBCASE("sphere bump data with general a converges") {
    for (double a : {1.0, 0.5, -1.0}) {
      const auto r = study(sphere, [a](const pme::Trajectory& t) {
        return prop21_residual(t, a, 2.0, 0.3);
      }, a, 32, 5e-4);
      MESSAGE("prop21 sphere a=" << a << " order " << *r.measured_order << " residual "
                                 << r.max_abs_residual);
      CHECK(*r.measured_order >= 1.8);
    }
  }
  SUBCASE("homogeneous sphere matches the closed-form oracle") {
    for (double a : {1.0, 0.5}) {
      const auto traj = homogeneous_sphere(a);
      const double b = 2.0, c = -0.7;
      const auto F = F_history(traj, b, c);
      for (std::size_t j = 2; j + 2 < traj.size(); ++j) {
        const auto o = homogeneous_sphere_oracle(2, 2.0, a, b, c, 1.0, 2.0, traj.time(j));
        const auto lhs = L_operator(F, traj, j);
        const auto rhs = sum(prop21_terms(traj, j, F[j], a, b, c));
        CHECK(std::abs(F[j][20] - o.F) <= 1e-6 * std::abs(o.F));
        CHECK(std::abs(lhs[20] - o.LF) <= 1e-6 * std::abs(o.LF));
        CHECK(std::abs(rhs[20] - o.LF) <= 1e-6 * std::abs(o.LF));
      }
    }
  }
  SUBCASE("a must match the trajectory") {
    const auto traj = homogeneous_sphere();
    CHECK_THROWS_AS(prop21_residual(traj, 0.5, 2.0, -1.0), std::invalid_argument);
  }
}

TEST_CASE("Proposition 2.2") {
  SUBCASE("torus bump data converges") {
    for (double b : {1.0, 2.0, 3.0}) {
      const auto r = study(torus, [b](const pme::Trajectory& t) { return prop22_residual(t, b); });
      MESSAGE("prop22 b=" << b << " order " << *r.measured_order << " residual "
                          << r.max_abs_residual);
      CHECK(*r.measured_order >= 1.8);
    }
  }
  SUBCASE("b = 1 collapses the (b-1) groups exactly") {
    const auto traj = homogeneous_sphere();
    const auto F = F_history(traj, 1.0, 0.0);
    for (const auto& term : prop22_terms(traj, 5, F[5], 1.0))
      if (term.name == "(b-1)/v curvature" || term.name == "(b-1) R/v F" ||
          term.name == "y squared" || term.name == "y R/v")
        CHECK(term.value.max_abs() == 0.0);
  }
  SUBCASE("agrees with Proposition 2.1 at a = 1, c = 1 - b") {
    const auto torus_traj = pme::run(bump_params(0.1, 0.005), torus(32));
    const auto sphere_traj = pme::run(bump_params(0.05, 1e-3), sphere(32));
    for (double b : {1.0, 1.5, 2.0, 5.0}) {
      CHECK(prop21_vs_prop22(torus_traj, b).max_abs_residual <= 1e-10);
      CHECK(prop21_vs_prop22(sphere_traj, b).max_abs_residual <= 1e-10);
    }
  }
  SUBCASE("homogeneous sphere matches the closed-form oracle") {
    const auto traj = homogeneous_sphere();
    for (double b : {1.0, 2.0, 3.0}) {
      const auto F = F_history(traj, b, 1.0 - b);
      for (std::size_t j = 2; j + 2 < traj.size(); ++j) {
        const auto o = homogeneous_sphere_oracle(2, 2.0, 1.0, b, 1.0 - b, 1.0, 2.0, traj.time(j));
        const auto rhs = sum(prop22_terms(traj, j, F[j], b));
        CHECK(std::abs(rhs[30] - o.LF) <= 1e-6 * std::abs(o.LF));
      }
      CHECK(prop22_residual(traj, b).max_abs_residual <= 1e-6 * 400.0);
    }
  }
  SUBCASE("needs a = 1 and b != 0") {
    CHECK_THROWS_AS(prop22_residual(homogeneous_sphere(0.5), 2.0), std::invalid_argument);
    const auto traj = homogeneous_sphere();
    CHECK_THROWS_AS(prop22_terms(traj, 3, traj.v(3), 0.0), std::invalid_argument);
  }
}

TEST_CASE("Bochner formula") {
  SUBCASE("constant f") {
    const auto m = sphere(32);
    CHECK(bochner_residual(ScalarField::constant(m.grid(), 2.0), m).max_abs_residual == 0.0);
  }
  SUBCASE("torus cos x") {
    std::vector<double> errors;
    for (std::size_t N : {32, 64, 128}) {
      const auto m = torus(N);
      errors.push_back(
          bochner_residual(m.sample([](double s) { return std::cos(s); }), m).max_abs_residual);
    }
    MESSAGE("torus bochner order " << measured_order(errors));
    CHECK(measured_order(errors) >= 1.8);
  }
  SUBCASE("sphere cos theta") {
    std::vector<double> errors;
    for (std::size_t N : {32, 64, 128}) {
      const auto m = sphere(N);
      errors.push_back(
          bochner_residual(m.sample([](double s) { return std::cos(s); }), m).max_abs_residual);
    }
    MESSAGE("sphere bochner order " << measured_order(errors));
    CHECK(measured_order(errors) >= 1.8);
  }
}

TEST_CASE("y - b z decomposition") {
  const auto traj = pme::run(bump_params(0.1, 0.005), torus(32));
  for (double b : {1.0, 2.0, 3.5}) {
    const auto r = yz_decomposition_check(traj, b);
    CHECK(r.algebraic.max_abs_residual <= 1e-12);
    CHECK(r.b1.has_value() == (b == 1.0));
  }
  SUBCASE("b = 1 residual converges on the torus") {
    const auto r = study(torus, [](const pme::Trajectory& t) {
      return *yz_decomposition_check(t, 1.0).b1;
    });
    MESSAGE("yz b1 order " << *r.measured_order << " residual " << r.max_abs_residual);
    CHECK(*r.measured_order >= 1.8);
  }
  SUBCASE("homogeneous sphere b = 1") {
    const auto r = yz_decomposition_check(homogeneous_sphere(), 1.0);
    CHECK(r.b1->max_abs_residual <= 1e-6);
  }
}
