#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rfpme/differencing.hpp"
#include "rfpme/errors.hpp"
#include "rfpme/geometry.hpp"
#include "rfpme/ricci_flow.hpp"

using namespace rfpme;
using std::numbers::pi;

namespace {

std::vector<ManifoldState> flow(ManifoldState m, double dt, std::size_t steps,
                                std::size_t store_every = 1) {
  std::vector<ManifoldState> out{m};
  for (std::size_t k = 1; k <= steps; ++k) {
    m = ricci_flow::evolve_metric(m, dt);
    if (k % store_every == 0) out.push_back(m);
  }
  return out;
}

}  // namespace

TEST_CASE("torus is static") {
  const auto m = ManifoldState::flat_torus({2 * pi}, 32);
  const auto next = ricci_flow::evolve_metric(m, 0.3);
  CHECK(next.time() == doctest::Approx(0.3));
  CHECK(geometry::scalar_curvature(next).max_abs() == 0.0);
  const auto states = flow(m, 0.1, 5);
  CHECK(ricci_flow::scalar_evolution_residual(states) == 0.0);
  const auto rep = ricci_flow::verify_hypotheses(states);
  CHECK(rep.curvature_nonneg);
  CHECK(rep.r_max == 0.0);
}

TEST_CASE("sphere follows rho^2(t) = r0^2 - 2(n-1)t") {
  const auto m = ManifoldState::round_sphere(2, 1.0, 32);
  auto s = m;
  for (int k = 0; k < 25; ++k) s = ricci_flow::evolve_metric(s, 0.01);
  CHECK(s.rho_sq() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(ricci_flow::extinction_time(m) == doctest::Approx(0.5));
  const auto R = geometry::scalar_curvature(s);
  CHECK(R.max() - R.min() <= 1e-12);
  CHECK_THROWS_AS(ricci_flow::evolve_metric(s, 0.25), ExtinctionError);

  const auto s3 = ricci_flow::evolve_metric(ManifoldState::round_sphere(3, 2.0, 32), 0.1);
  CHECK(s3.rho_sq() == doctest::Approx(2.0 - 0.4).epsilon(1e-15));

  const auto states = flow(m, 0.01, 20);
  CHECK(ricci_flow::scalar_evolution_residual(states) <= 1e-8);
  const auto rep = ricci_flow::verify_hypotheses(states);
  CHECK(rep.curvature_nonneg);
  CHECK(rep.r_max == doctest::Approx(2.0 / (1.0 - 0.4)));
}

TEST_CASE("sphere interpolation is exact") {
  const auto m0 = ManifoldState::round_sphere(2, 1.0, 32);
  const auto m1 = ricci_flow::evolve_metric(m0, 0.1);
  const auto mid = ricci_flow::interpolate_metric(m0, m1, 0.05);
  CHECK(mid.rho_sq() == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(mid.time() == 0.05);
}

TEST_CASE("round surface shrinks like the round sphere") {
  const auto m = ManifoldState::rotsym_surface(profiles::round, 64);
  const double h = m.spacing();
  const double dt = 0.2 * h * h;
  const std::size_t steps = static_cast<std::size_t>(0.1 / dt);
  auto s = m;
  for (std::size_t k = 0; k < steps; ++k) s = ricci_flow::evolve_metric(s, dt);
  const auto R = geometry::scalar_curvature(s);
  CHECK(R.max() - R.min() < 1e-9);
  const double rho_sq = std::exp(2 * s.log_conformal()[10]);
  CHECK(rho_sq == doctest::Approx(1.0 - 2.0 * s.time()).epsilon(1e-3));
  CHECK(ricci_flow::extinction_time(m) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("surface step aborts above the stability limit") {
  const auto m = ManifoldState::rotsym_surface(profiles::round, 64);
  const double h = m.spacing();
  CHECK_THROWS_AS(ricci_flow::evolve_metric(m, 0.6 * h * h), CflViolation);
  CHECK_NOTHROW(ricci_flow::evolve_metric(m, 0.4 * h * h));
}

TEST_CASE("surface Hermite interpolation is fourth order in dt") {
  const auto m0 = ManifoldState::rotsym_surface(profiles::perturbed(0.1), 32);
  const double h = m0.spacing();
  std::vector<double> errors;
  for (double dt : {0.2 * h * h, 0.1 * h * h, 0.05 * h * h}) {
    const auto m1 = ricci_flow::evolve_metric(m0, dt);
    const auto half = ricci_flow::evolve_metric(m0, dt / 2);
    const auto mid = ricci_flow::interpolate_metric(m0, m1, dt / 2);
    double e = 0;
    for (std::size_t i = 0; i < m0.nodes(); ++i)
      e = std::max(e, std::abs(mid.log_conformal()[i] - half.log_conformal()[i]));
    errors.push_back(e);
  }
  CHECK(measured_order(errors) >= 3.5);
}

TEST_CASE("scalar curvature evolution converges on the perturbed surface") {
  std::vector<double> errors;
  const double T = 0.05;
  std::size_t N = 16;
  std::size_t steps = 40;
  for (int level = 0; level < 3; ++level, N *= 2, steps *= 4) {
    const auto m = ManifoldState::rotsym_surface(profiles::perturbed(0.1), N);
    errors.push_back(ricci_flow::scalar_evolution_residual(flow(m, T / steps, steps, 4)));
  }
  CAPTURE(errors[0]);
  CAPTURE(errors[2]);
  CHECK(measured_order(errors) >= 1.8);
}

TEST_CASE("LYH trace quantity") {
  const auto torus = ManifoldState::flat_torus({2 * pi}, 32);
  const auto phi = torus.sample([](double x) { return std::cos(x); });
  CHECK(ricci_flow::lyh_trace(torus, ScalarField::constant(torus.grid(), 0.0), phi, 0.3)
            .max_abs() == 0.0);

  const auto s = ManifoldState::round_sphere(2, 0.5, 32, 0.25);
  const std::vector<ManifoldState> states{s};
  const auto q = ricci_flow::lyh_trace(s, ricci_flow::curvature_rate(states, 0),
                                       ScalarField::constant(s.grid(), 4.0), 0.25);
  CHECK(q.min() == doctest::Approx(8.0));
  CHECK(q.max() == doctest::Approx(8.0));
  CHECK_THROWS_AS(ricci_flow::lyh_trace(s, q, q, 0.0), std::invalid_argument);
}

TEST_CASE("dumbbell profile violates the curvature hypothesis") {
  const auto m = ManifoldState::rotsym_surface(profiles::dumbbell(2.0), 64);
  const std::vector<ManifoldState> states{m};
  const auto rep = ricci_flow::verify_hypotheses(states);
  CHECK_FALSE(rep.curvature_nonneg);
  CHECK(rep.r_min < 0.0);
  CHECK_THROWS_AS(ricci_flow::verify_hypotheses(std::span<const ManifoldState>{}),
                  std::invalid_argument);
  const auto ok = ManifoldState::rotsym_surface(profiles::perturbed(0.1), 64);
  CHECK(ricci_flow::verify_hypotheses(std::vector<ManifoldState>{ok}).curvature_nonneg);
}
