#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rfpme/geometry.hpp"
#include "rfpme/harnack.hpp"
#include "rfpme/pme.hpp"

using namespace rfpme;
using namespace rfpme::harnack;
using std::numbers::pi;

namespace {

pme::Trajectory torus_bump(std::size_t N = 64, double T = 1.0, double dt = 0.01,
                           std::size_t store_every = 2) {
  pme::PmeParams p;
  p.T = T;
  p.dt = dt;
  p.store_every = store_every;
  p.u0.kind = pme::InitialData::Kind::Bump;
  p.u0.level = 1.0;
  p.u0.amplitude = 0.5;
  return pme::run(p, ManifoldState::flat_torus({2 * pi}, N));
}

pme::Trajectory homogeneous_sphere(double T = 0.2, double dt = 1e-4, std::size_t store_every = 10) {
  pme::PmeParams p;
  p.T = T;
  p.dt = dt;
  p.store_every = store_every;
  return pme::run(p, ManifoldState::round_sphere(2, 1.0, 64));
}

}  // namespace

TEST_CASE("Harnack constants match the theorem formulas") {
  const auto a = constants(3, 2.0, 2.0, Variant::Thm_1_4);
  CHECK(a.alpha == doctest::Approx(0.75));
  CHECK(a.d == doctest::Approx(1.5));
  CHECK(a.c0 == doctest::Approx(0.5 + std::sqrt(0.75)));
  CHECK(a.kappa == doctest::Approx(0.6));

  const auto b = constants(2, 2.0, 1.0, Variant::Thm_1_4);
  CHECK(b.alpha == doctest::Approx(0.5));
  CHECK(b.d == doctest::Approx(0.5));
  CHECK(b.c0 == doctest::Approx(std::sqrt(0.125)));

  for (int n : {1, 2, 3, 5})
    for (double p : {1.5, 2.0, 3.0}) {
      const auto t11 = constants(n, p, 7.0, Variant::Thm_1_1);
      const auto t14 = constants(n, p, 2.0, Variant::Thm_1_4);
      CHECK(t11.b == 2.0);
      CHECK(t11.alpha == doctest::Approx(t14.alpha).epsilon(1e-15));
      CHECK(t11.d == doctest::Approx(t14.d).epsilon(1e-15));
      const double q = n * (p - 1);
      const auto lim = constants(n, p, 3.0, Variant::Thm_b1_limit);
      CHECK(lim.b == 1.0);
      CHECK(lim.alpha == doctest::Approx(q / (2 + q)));
      CHECK(lim.d == doctest::Approx(std::max(q / (2 + q), 0.5)));
      const auto bg = constants(n, p, 1.0, Variant::Thm_b1_bounded_grad);
      CHECK(bg.d == doctest::Approx(q / (2 + q)));
      CHECK(bg.alpha == bg.d);
      CHECK(bg.c0 == doctest::Approx(std::sqrt(bg.alpha * (p - 1) * (n - 1) / (2.0 * n))));
    }

  CHECK_THROWS_AS(constants(2, 2.0, 0.5, Variant::Thm_1_4), std::invalid_argument);
  CHECK_THROWS_AS(constants(2, 1.0, 2.0, Variant::Thm_1_4), std::invalid_argument);
  CHECK_THROWS_AS(constants(0, 2.0, 2.0, Variant::Thm_1_4), std::invalid_argument);
  for (auto v : {Variant::Thm_1_1, Variant::Thm_1_4, Variant::Thm_b1_limit,
                 Variant::Thm_b1_bounded_grad})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK_FALSE(parse_variant("Thm_9").has_value());
}

TEST_CASE("harnack_F closed forms") {
  SUBCASE("steady torus gives F = 0") {
    const auto m = ManifoldState::flat_torus({2 * pi}, 16);
    const auto v = ScalarField::constant(m.grid(), 3.0);
    const auto z = ScalarField::constant(m.grid(), 0.0);
    for (double b : {1.0, 2.0, 4.0}) {
      const auto F = harnack_F(m, v, z, 2.0, 0.7, b, -0.3);
      CHECK(F.definition.max_abs() == 0.0);
      CHECK(F.expanded.max_abs() == 0.0);
    }
  }
  SUBCASE("homogeneous sphere at t = 0.25 gives F = -9") {
    const auto m = ManifoldState::round_sphere(2, 0.5, 32, 0.25);
    const auto v = ScalarField::constant(m.grid(), 4.0);
    const auto vt = ScalarField::constant(m.grid(), 16.0);  // v_t = (p-1) R v
    const auto F = harnack_F(m, v, vt, 2.0, 1.0, 2.0, -1.0);
    CHECK(F.definition.max() == doctest::Approx(-9.0).epsilon(1e-14));
    CHECK(F.definition.min() == doctest::Approx(-9.0).epsilon(1e-14));
    CHECK(F.difference.max_abs() <= 1e-12);
  }
  SUBCASE("both forms agree along a bump run, converging at second order") {
    const auto worst = [](std::size_t N, double dt) {
      const auto traj = torus_bump(N, 0.5, dt, 1);
      double w = 0.0;
      for (std::size_t j = 2; j + 2 < traj.size(); ++j) {
        const auto F = harnack_F(traj.state(j), traj.v(j), traj.v_t(j), 2.0, 1.0, 2.0, -1.0);
        w = std::max(w, F.difference.max_abs());
      }
      return w;
    };
    const double coarse = worst(64, 0.01), fine = worst(128, 0.005);
    CHECK(coarse <= 1e-2);
    CHECK(coarse / fine >= 3.5);
  }
  SUBCASE("nonpositive pressure is rejected") {
    const auto m = ManifoldState::flat_torus({2 * pi}, 16);
    const auto z = ScalarField::constant(m.grid(), 0.0);
    CHECK_THROWS_AS(harnack_F(m, z, z, 2.0, 1.0, 2.0, 0.0), std::domain_error);
  }
}

TEST_CASE("theorem margins") {
  SUBCASE("constant torus solution: margin = -d/t") {
    pme::PmeParams p;
    p.T = 1.0;
    p.dt = 0.01;
    p.store_every = 5;
    const auto traj = pme::run(p, ManifoldState::flat_torus({2 * pi}, 16));
    const auto k = constants(1, 2.0, 2.0, Variant::Thm_1_1);
    const auto r = theorem_margin(traj, k, 0.05);
    CHECK(r.pass);
    CHECK(r.worst_margin == doctest::Approx(-k.d / 1.0));
    CHECK(std::isnan(r.series.front()));
  }
  SUBCASE("homogeneous sphere b = 2: margin = -2(p-1)R - R/v - d/t") {
    const auto traj = homogeneous_sphere();
    const auto k = constants(2, 2.0, 2.0, Variant::Thm_1_1);
    const auto r = theorem_margin(traj, k, 0.01);
    CHECK(r.pass);
    for (std::size_t j = 1; j < traj.size(); ++j) {
      const double t = traj.time(j);
      const double R = 2.0 / (1.0 - 2.0 * t), v = 2.0 / (1.0 - 2.0 * t);
      CHECK(r.series[j] == doctest::Approx(-2.0 * R - R / v - k.d / t).epsilon(1e-5));
    }
  }
  SUBCASE("bump data passes every variant; b = 2 variants agree") {
    const auto traj = torus_bump();
    for (double b : {1.0, 1.5, 2.0, 3.0, 5.0}) {
      const auto r = theorem_margin(traj, constants(1, 2.0, b, Variant::Thm_1_4), 0.05);
      CHECK_MESSAGE(r.pass, "b = " << b << " margin " << r.worst_margin);
    }
    const auto r14 = theorem_margin(traj, constants(1, 2.0, 2.0, Variant::Thm_1_4), 0.05);
    const auto r11 = theorem_margin(traj, constants(1, 2.0, 2.0, Variant::Thm_1_1), 0.05);
    CHECK(std::abs(r14.worst_margin - r11.worst_margin) <= 1e-12);
    for (auto v : {Variant::Thm_b1_limit, Variant::Thm_b1_bounded_grad})
      CHECK(theorem_margin(traj, constants(1, 2.0, 1.0, v), 0.05).pass);
  }
  SUBCASE("t_min beyond the run skips") {
    const auto traj = torus_bump(32, 0.2, 0.01, 5);
    const auto r = theorem_margin(traj, constants(1, 2.0, 2.0, Variant::Thm_1_1), 5.0);
    CHECK(r.status == CheckStatus::Skipped);
    CHECK_FALSE(r.pass);
    CHECK_THROWS_AS(theorem_margin(traj, constants(1, 2.0, 2.0, Variant::Thm_1_1), 0.0),
                    std::invalid_argument);
  }
}

TEST_CASE("flat-space classics") {
  SUBCASE("LNVV on the torus") {
    const auto traj = torus_bump();
    for (double alpha : {1.1, 1.5, 2.0}) {
      const auto r = lnvv_check(traj, alpha, 0.05);
      CHECK_MESSAGE(r.pass, "alpha = " << alpha << " margin " << r.worst_margin);
    }
    CHECK_THROWS_AS(lnvv_check(traj, 1.0, 0.05), std::invalid_argument);
    CHECK_THROWS_AS(lnvv_check(homogeneous_sphere(0.05, 1e-3, 1), 1.5, 0.01),
                    std::invalid_argument);
  }
  SUBCASE("LNVV on a constant solution") {
    pme::PmeParams p;
    p.T = 1.0;
    p.dt = 0.01;
    p.store_every = 10;
    const auto traj = pme::run(p, ManifoldState::flat_torus({2 * pi}, 16));
    const auto r = lnvv_check(traj, 1.5, 0.05);
    CHECK(r.worst_margin == doctest::Approx(-(1.0 / 3.0) * 2.25 / 1.0));
  }
  SUBCASE("Barenblatt equality") {
    CHECK(classical_ab_check({1, 2.0, 1.0}, 1.0) <= 1e-10);
    CHECK(classical_ab_check({1, 2.0, 0.3}, 2.5) <= 1e-10);
    CHECK(classical_ab_check({3, 2.0, 1.0}, 1.0) <= 1e-9);
    CHECK(classical_ab_check({2, 3.0, 1.0}, 0.5) <= 1e-9);
    const Barenblatt bb{1, 2.0, 1.0};
    CHECK(bb.kappa() == doctest::Approx(1.0 / 3.0));
    CHECK(bb.k2() == doctest::Approx(1.0 / 12.0));
    CHECK(bb.pressure(bb.support_radius(1.0) * 1.01, 1.0) == 0.0);
    CHECK_THROWS_AS(classical_ab_check(bb, 0.0), std::invalid_argument);
  }
  SUBCASE("LYH on the homogeneous sphere") {
    const auto r = lyh_check(homogeneous_sphere(), 0.01);
    CHECK(r.pass);
    CHECK(r.worst_margin < 0.0);
  }
}

TEST_CASE("path Harnack closed forms on the homogeneous sphere") {
  const auto traj = homogeneous_sphere();
  const auto k = constants(2, 2.0, 2.0, Variant::Thm_1_1);
  const std::size_t j1 = 5, j2 = 18;  // t = 0.05, 0.18
  const double t1 = traj.time(j1), t2 = traj.time(j2);
  const auto v = [](double t) { return 2.0 / (1.0 - 2.0 * t); };
  const double v_min = 2.0;

  SUBCASE("constant curve") {
    const auto c = straight_curve(traj, 7, j1, 7, j2);
    // Gamma = int R/2 = int 1/(1-2t) dt.
    const double gamma = -0.5 * std::log((1.0 - 2.0 * t2) / (1.0 - 2.0 * t1));
    CHECK(curve_action(traj, c, 2.0) == doctest::Approx(gamma).epsilon(1e-8));
    const double slack =
        std::log(v(t2)) + k.d / 2.0 * std::log(t2 / t1) + gamma / v_min - std::log(v(t1));
    const auto r = path_harnack_check(traj, k, c, PathForm::Multiplicative);
    CHECK(r.pass);
    CHECK(std::abs(-r.worst_margin - slack) <= 1e-6);
  }
  SUBCASE("geodesic between two nodes") {
    const std::size_t i1 = 10, i2 = 40;
    const auto& m = traj.state(0);
    const double ds = m.coordinate(i2) - m.coordinate(i1);
    const auto c = straight_curve(traj, i1, j1, i2, j2);
    // g_ss = rho^2 = 1 - 2t along the curve.
    const double speed_sq = ds * ds / ((t2 - t1) * (t2 - t1));
    const double gamma = -0.5 * std::log((1.0 - 2.0 * t2) / (1.0 - 2.0 * t1)) +
                         0.5 * speed_sq * ((t2 - t1) - (t2 * t2 - t1 * t1));
    CHECK(curve_action(traj, c, 2.0) == doctest::Approx(gamma).epsilon(1e-8));
    const double mult =
        std::log(v(t2)) + k.d / 2.0 * std::log(t2 / t1) + gamma / v_min - std::log(v(t1));
    const auto rm = path_harnack_check(traj, k, c, PathForm::Multiplicative);
    CHECK(std::abs(-rm.worst_margin - mult) <= 1e-6);

    const double v_max = v(0.2), R_max = 2.0 / 0.6;
    const double dist = std::sqrt(1.0 - 2.0 * t1) * ds;
    const double bound = -k.d / 2.0 * v_max * std::log(t2 / t1) - 0.5 * R_max * (t2 - t1) -
                         0.5 * dist * dist / (t2 - t1);
    const double add = (v(t2) - v(t1)) - bound;
    const auto ra = path_harnack_check(traj, k, c, PathForm::Additive);
    CHECK(ra.pass);
    CHECK(std::abs(-ra.worst_margin - add) <= 1e-6);
  }
  SUBCASE("invalid curves") {
    CHECK_THROWS_AS(path_harnack_check(traj, k, straight_curve(traj, 1, 0, 1, 3),
                                       PathForm::Multiplicative),
                    std::invalid_argument);
    CHECK_THROWS_AS(path_harnack_check(traj, k, straight_curve(traj, 1, 4, 1, 3),
                                       PathForm::Multiplicative),
                    std::invalid_argument);
  }
}

TEST_CASE("random curves") {
  const auto traj = torus_bump();
  SUBCASE("deterministic per (seed, index)") {
    const auto a = random_curve(traj, 42, 7, 0.05);
    const auto b = random_curve(traj, 42, 7, 0.05);
    const auto c = random_curve(traj, 42, 8, 0.05);
    CHECK(a.s == b.s);
    CHECK(a.t == b.t);
    CHECK((a.s != c.s || a.t != c.t));
    CHECK(traj.time(a.state1) >= 0.05);
    CHECK(a.state1 < a.state2);
  }
  SUBCASE("100 curves pass in both forms for every b") {
    for (double b : {1.0, 2.0, 3.0}) {
      const auto k = constants(1, 2.0, b, Variant::Thm_1_4);
      for (auto form : {PathForm::Multiplicative, PathForm::Additive}) {
        const auto r = path_harnack_sweep(traj, k, form, 2024, 100, 0.05);
        CHECK_MESSAGE(r.pass, r.id << " " << r.worst_margin << " " << r.note);
      }
    }
  }
  SUBCASE("lattice action is a finite upper bound on the infimum") {
    const auto c = random_curve(traj, 1, 0, 0.05);
    const double lat = lattice_action(traj, c, 2.0, 32);
    CHECK(std::isfinite(lat));
    CHECK(lat >= 0.0);
    // Staying still is admissible only when both endpoints coincide; the
    // straight curve is always a lattice candidate when its nodes are on it.
    const auto s = straight_curve(traj, c.node1, c.state1, c.node1, c.state2);
    CHECK(lattice_action(traj, s, 2.0, 64) <= curve_action(traj, s, 2.0) + 1e-12);
  }
}
