#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rfpme/differencing.hpp"
#include "rfpme/errors.hpp"
#include "rfpme/geometry.hpp"
#include "rfpme/pme.hpp"
#include "rfpme/ricci_flow.hpp"

using namespace rfpme;
using std::numbers::pi;

namespace {

pme::PmeParams params(double T, double dt, std::size_t store_every = 1) {
  pme::PmeParams p;
  p.p = 2.0;
  p.T = T;
  p.dt = dt;
  p.store_every = store_every;
  return p;
}

pme::InitialData bump(double level, double amp) {
  pme::InitialData d;
  d.kind = pme::InitialData::Kind::Bump;
  d.level = level;
  d.amplitude = amp;
  return d;
}

}  // namespace

TEST_CASE("pressure") {
  const auto t = ManifoldState::flat_torus({2 * pi}, 16);
  CHECK(pme::pressure(ScalarField::constant(t.grid(), 1.0), 2.0).max() == 2.0);
  CHECK(pme::pressure(ScalarField::constant(t.grid(), 4.0), 2.0).max() == 8.0);
  CHECK(pme::pressure(ScalarField::constant(t.grid(), 1.0), 3.0).max() == 1.5);
  CHECK_THROWS_AS(pme::pressure(ScalarField::constant(t.grid(), 0.0), 2.0), PositivityLoss);
}

TEST_CASE("constant data on the torus is steady") {
  const auto m = ManifoldState::flat_torus({2 * pi}, 32);
  auto p = params(0.5, 0.01, 10);
  p.u0.level = 1.7;
  const auto traj = pme::run(p, m);
  CHECK(traj.size() == 6);
  for (std::size_t j = 0; j < traj.size(); ++j) {
    CHECK(traj.u(j).max() == 1.7);
    CHECK(traj.u(j).min() == 1.7);
    CHECK(traj.v_t(j).max_abs() == 0.0);
  }
  CHECK(pme::max_mass_drift(traj) == 0.0);
}

TEST_CASE("homogeneous sphere reproduces u = (1 - 2t)^{-1}") {
  const auto m = ManifoldState::round_sphere(2, 1.0, 64);
  const auto traj = pme::run(params(0.2, 1e-3, 10), m);
  double err = 0.0;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double exact = 1.0 / (1.0 - 2.0 * traj.time(j));
    err = std::max(err, (traj.u(j) - exact).max_abs() / exact);
  }
  CHECK(err <= 1e-6);
  CHECK(pme::max_mass_drift(traj) <= 1e-6);
  CHECK(traj.r_max() == doctest::Approx(2.0 / 0.6));
}

TEST_CASE("bump runs conserve mass and contract the range") {
  const auto t = ManifoldState::flat_torus({2 * pi}, 64);
  auto p = params(1.0, 0.01, 5);
  p.u0 = bump(1.0, 0.1);
  const auto traj = pme::run(p, t);
  CHECK(pme::max_mass_drift(traj) <= 1e-12);
  for (std::size_t j = 1; j < traj.size(); ++j) {
    CHECK(traj.u(j).max() < traj.u(j - 1).max());
    CHECK(traj.u(j).min() > traj.u(j - 1).min());
  }
  auto every = p;
  every.store_every = 1;
  CHECK(pme::pressure_equation_residual(pme::run(every, t)) < 1e-3);
  CHECK(traj.stats().max_step_number <= 0.2 + 1e-12);

  const auto s = ManifoldState::round_sphere(2, 1.0, 64);
  auto ps = params(0.2, 1e-3, 10);
  ps.u0 = bump(1.0, 0.3);
  CHECK(pme::max_mass_drift(pme::run(ps, s)) <= 1e-6);

  const auto w = ManifoldState::rotsym_surface(profiles::perturbed(0.1), 64);
  CHECK(pme::max_mass_drift(pme::run(ps, w)) <= 1e-6);
}

TEST_CASE("RK4 step is fourth order in dt (step doubling)") {
  const auto m = ManifoldState::flat_torus({2 * pi}, 32);
  auto p = params(1.0, 1.0);
  p.u0 = bump(1.0, 0.1);
  const auto u0 = p.u0.sample(m);
  std::vector<double> errors;
  for (double dt : {0.004, 0.002, 0.001}) {
    const auto full = pme::step(u0, m, m.at_time(dt), p);
    const auto half = pme::step(u0, m, m.at_time(dt / 2), p);
    const auto two = pme::step(half, m.at_time(dt / 2), m.at_time(dt), p);
    errors.push_back((full - two).max_abs());
  }
  // One-step local error is O(dt^5).
  CHECK(measured_order(errors) >= 4.5);
}

namespace {

pme::ExactSolution decaying_cosine() {
  pme::ExactSolution ex;
  ex.value = [](double x, double t) { return 1.0 + 0.1 * std::cos(x) * std::exp(-t); };
  ex.ds = [](double x, double t) { return -0.1 * std::sin(x) * std::exp(-t); };
  ex.dss = [](double x, double t) { return -0.1 * std::cos(x) * std::exp(-t); };
  ex.dt = [](double x, double t) { return -0.1 * std::cos(x) * std::exp(-t); };
  return ex;
}

}  // namespace

TEST_CASE("manufactured solutions converge in space") {
  const auto ex = decaying_cosine();
  for (int family = 0; family < 2; ++family) {
    std::vector<double> errors;
    std::size_t steps = 200;
    for (std::size_t N : {16u, 32u, 64u}) {
      const auto m = family == 0 ? ManifoldState::flat_torus({2 * pi}, N)
                                 : ManifoldState::round_sphere(2, 1.0, N);
      errors.push_back(pme::manufactured_run(params(0.2, 0.2 / steps, steps / 4), m, ex).max_error);
      steps *= 4;
    }
    CAPTURE(family);
    CHECK(measured_order(errors) >= 1.8);
  }
}

TEST_CASE("manufactured solutions converge in time") {
  const auto ex = decaying_cosine();
  const auto m = ManifoldState::flat_torus({2 * pi}, 16);
  const auto reference = pme::manufactured_run(params(0.4, 0.4 / 320, 160), m, ex);
  std::vector<double> errors;
  for (std::size_t steps : {40u, 80u, 160u}) {
    const auto r = pme::manufactured_run(params(0.4, 0.4 / steps, steps / 2), m, ex);
    CHECK(r.trajectory.stats().substeps == 1);
    errors.push_back((r.trajectory.u(2) - reference.trajectory.u(2)).max_abs());
  }
  CHECK(measured_order(errors) >= 3.5);
}

TEST_CASE("constant manufactured solution without source is exact") {
  pme::ExactSolution ex;
  ex.value = [](double, double) { return 2.0; };
  ex.ds = ex.dss = ex.dt = [](double, double) { return 0.0; };
  const auto m = ManifoldState::flat_torus({2 * pi}, 32);
  CHECK(pme::manufactured_run(params(0.1, 0.01, 5), m, ex).max_error == 0.0);
}

TEST_CASE("run validation and failure modes") {
  const auto s = ManifoldState::round_sphere(2, 1.0, 32);
  CHECK_THROWS_AS(pme::run(params(0.6, 0.01), s), ExtinctionError);
  CHECK_THROWS_AS(pme::run(params(0.2, 0.03), s), std::invalid_argument);
  CHECK_THROWS_AS(pme::run(params(0.2, 0.01, 3), s), std::invalid_argument);
  auto bad = params(0.2, 0.01);
  bad.p = 1.0;
  CHECK_THROWS_AS(pme::run(bad, s), std::invalid_argument);
  const auto t = ManifoldState::flat_torus({2 * pi}, 32);
  auto p = params(0.1, 0.05);
  p.u0 = bump(1.0, 0.1);
  const auto u = p.u0.sample(t);
  CHECK_THROWS_AS(pme::step(u, t, t.at_time(0.05), p), CflViolation);
  auto neg = params(0.1, 0.01);
  neg.u0 = bump(1.0, 1.5);
  CHECK_THROWS_AS(pme::run(neg, t), std::invalid_argument);
}

TEST_CASE("substeps honour the CFL constant") {
  const auto s = ManifoldState::round_sphere(2, 1.0, 256);
  const auto traj = pme::run(params(0.2, 1e-4, 100), s);
  CHECK(traj.stats().substeps > 1);
  CHECK(traj.stats().max_step_number <= 0.2 + 1e-12);
}
