#include "rfpme/identities.hpp"

#include <cmath>
#include <stdexcept>

#include "rfpme/differencing.hpp"
#include "rfpme/geometry.hpp"

namespace rfpme::identities {
namespace {

// Stored states whose centered differences of differenced quantities are
// available: the first and last two are skipped.
struct Window {
  std::size_t first, last;  // [first, last)
};

Window residual_window(const pme::Trajectory& traj) {
  if (traj.size() < 5)
    throw std::invalid_argument("identity residuals need at least five stored states");
  return {2, traj.size() - 2};
}

double stored_step(const pme::Trajectory& traj) { return traj.time(1) - traj.time(0); }

// Folds |field| over interior nodes into the worst-residual record.
void offer(IdentityResidual& r, const ScalarField& residual, const ManifoldState& m, double t) {
  const auto range = geometry::interior_nodes(m);
  for (std::size_t i = range.first; i < range.last; ++i) {
    const double e = std::abs(residual[i]);
    if (!(e <= r.max_abs_residual)) {  // also propagates NaN
      r.max_abs_residual = e;
      r.node = i;
      r.time = t;
    }
  }
}

// Records lhs - rhs and the magnitude of lhs.
void offer(IdentityResidual& r, const ScalarField& lhs, const ScalarField& rhs,
           const ManifoldState& m, double t) {
  const auto range = geometry::interior_nodes(m);
  for (std::size_t i = range.first; i < range.last; ++i)
    r.scale = std::max(r.scale, std::abs(lhs[i]));
  offer(r, lhs - rhs, m, t);
}

IdentityResidual start(std::string id, const pme::Trajectory& traj) {
  IdentityResidual r;
  r.id = std::move(id);
  r.intervals = traj.state(0).intervals();
  r.step = stored_step(traj);
  return r;
}

void require_history(std::span<const ScalarField> h, const pme::Trajectory& traj) {
  if (h.size() != traj.size())
    throw std::invalid_argument("field history must hold one field per stored state");
}

// dR/dt from the scalar-curvature evolution Delta R + 2|Rc|^2, built from
// geometry primitives only.
ScalarField curvature_time_derivative(const ManifoldState& m) {
  const auto R = geometry::scalar_curvature(m);
  return geometry::laplacian(R, m) + 2.0 * geometry::ricci_norm_sq(m);
}

// |grad^2 v + k Rc|^2 from the orthonormal Hessian diagonal and Rc = (R/n) g.
ScalarField shifted_hessian_norm_sq(const ScalarField& v, const ManifoldState& m, double k) {
  const auto H = geometry::hessian(v, m);
  const auto R = geometry::scalar_curvature(m);
  const double n = m.dim();
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double shift = k * R[i] / n;
    const double radial = H.radial[i] + shift;
    double total = radial * radial;
    if (H.angular_multiplicity > 0) {
      const double angular = H.angular[i] + shift;
      total += H.angular_multiplicity * angular * angular;
    }
    // Remaining flat directions of a torus carry only the shift.
    const int rest = m.dim() - 1 - H.angular_multiplicity;
    total += rest * shift * shift;
    out[i] = total;
  }
  return m.field(std::move(out));
}

}  // namespace

ScalarField L_operator(std::span<const ScalarField> history, const pme::Trajectory& traj,
                       std::size_t j) {
  require_history(history, traj);
  const auto& m = traj.state(j);
  const double p = traj.p();
  return time_derivative(history, traj.times(), j) -
         (p - 1.0) * traj.v(j) * geometry::laplacian(history[j], m);
}

double L_operator(std::span<const ScalarField> history, const pme::Trajectory& traj,
                  std::size_t node, std::size_t j) {
  return L_operator(history, traj, j)[node];
}

std::vector<ScalarField> sample_history(const pme::Trajectory& traj,
                                        const std::function<double(double, double)>& fn) {
  std::vector<ScalarField> out;
  out.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double t = traj.time(j);
    out.push_back(traj.state(j).sample([&](double s) { return fn(s, t); }));
  }
  return out;
}

IdentityResidual quotient_rule_residual(std::span<const ScalarField> f,
                                        std::span<const ScalarField> g,
                                        const pme::Trajectory& traj) {
  require_history(f, traj);
  require_history(g, traj);
  for (const auto& gj : g)
    if (!(gj.min() > 0.0)) throw std::domain_error("quotient rule needs g > 0");
  std::vector<ScalarField> q;
  q.reserve(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) q.push_back(f[j] / g[j]);

  const double p = traj.p();
  auto r = start("quotient_rule", traj);
  const auto w = residual_window(traj);
  for (std::size_t j = w.first; j < w.last; ++j) {
    const auto& m = traj.state(j);
    const auto lhs = L_operator(q, traj, j);
    const auto log_g = g[j].map([](double x) { return std::log(x); });
    const auto rhs = L_operator(f, traj, j) / g[j] - f[j] / (g[j] * g[j]) * L_operator(g, traj, j) +
                     2.0 * (p - 1.0) * traj.v(j) * geometry::gradient_dot(q[j], log_g, m);
    offer(r, lhs, rhs, m, traj.time(j));
  }
  return r;
}

std::vector<ScalarField> F_history(const pme::Trajectory& traj, double b, double c) {
  std::vector<ScalarField> out;
  out.reserve(traj.size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto& m = traj.state(j);
    const auto& v = traj.v(j);
    const auto R = geometry::scalar_curvature(m);
    out.push_back(geometry::gradient_norm_sq(v, m) / v - b * (traj.v_t(j) / v) + c * (R / v));
  }
  return out;
}

std::vector<Term> prop21_terms(const pme::Trajectory& traj, std::size_t j, const ScalarField& F,
                               double a, double b, double c) {
  const auto& m = traj.state(j);
  const auto& v = traj.v(j);
  const double p = traj.p();
  const double q = p - 1.0;
  const auto R = geometry::scalar_curvature(m);
  const auto Rt = curvature_time_derivative(m);
  const auto G = geometry::gradient_norm_sq(v, m);
  const auto lap = geometry::laplacian(v, m);
  const auto gradR_v = geometry::gradient_dot(R, v, m);
  const auto RcG = geometry::ricci_quadratic(v, m);

  std::vector<Term> t;
  t.push_back({"2p gradF.gradv", 2.0 * p * geometry::gradient_dot(F, v, m)});
  t.push_back({"c/v curvature",
               (c * Rt - 2.0 * c * gradR_v + 2.0 * (1.0 - b) * RcG) / v});
  t.push_back({"(p-1) curvature", -q * ((a * b + c) * Rt - 2.0 * a * gradR_v + 2.0 * RcG)});
  t.push_back({"hessian norm", -2.0 * q * geometry::hessian_norm_sq(v, m)});
  t.push_back({"ricci-hessian", -2.0 * b * q * geometry::ricci_hessian_contraction(v, m)});
  t.push_back({"ricci norm", 2.0 * c * q * geometry::ricci_norm_sq(m)});
  t.push_back({"laplacian squared", -b * q * q * (lap * lap)});
  t.push_back({"mixed laplacian",
               2.0 * (1.0 - b) * q * (G / v) * lap - a * b * q * q * (R * lap)});
  t.push_back({"gradient-curvature", a * (1.0 - b) * q * (G / v) * R +
                                         (1.0 - b) * (G * G) / (v * v) + c * (G / (v * v)) * R});
  t.push_back({"R^2/v tail", -a * c * q * (R * R) / v});
  return t;
}

std::vector<Term> prop22_terms(const pme::Trajectory& traj, std::size_t j, const ScalarField& F,
                               double b) {
  if (b == 0.0) throw std::invalid_argument("Proposition 2.2 divides by b; b must be nonzero");
  const auto& m = traj.state(j);
  const auto& v = traj.v(j);
  const double p = traj.p();
  const double q = p - 1.0;
  const auto R = geometry::scalar_curvature(m);
  const auto Rt = curvature_time_derivative(m);
  const auto G = geometry::gradient_norm_sq(v, m);
  const auto curv = Rt - 2.0 * geometry::gradient_dot(R, v, m) +
                    2.0 * geometry::ricci_quadratic(v, m);
  const auto y = G / v + R / v;

  std::vector<Term> t;
  t.push_back({"2p gradF.gradv", 2.0 * p * geometry::gradient_dot(F, v, m)});
  t.push_back({"(b-1)/v curvature", -(b - 1.0) * (curv / v)});
  t.push_back({"(p-1) curvature", -q * curv});
  t.push_back({"completed square", -2.0 * q * shifted_hessian_norm_sq(v, m, b / 2.0)});
  t.push_back({"ricci norm", (b - 2.0) * (b - 2.0) / 2.0 * q * geometry::ricci_norm_sq(m)});
  t.push_back({"F squared", -(F * F) / b});
  t.push_back({"(p-1)R F", -q * (R * F)});
  t.push_back({"(b-1) R/v F", -(2.0 * (b - 1.0) / b) * ((R / v) * F)});
  t.push_back({"y squared", -((b - 1.0) / b) * (y * y)});
  t.push_back({"y R/v", -((b - 1.0) * (b - 2.0) / b) * (y * (R / v))});
  return t;
}

ScalarField sum(std::span<const Term> terms) {
  if (terms.empty()) throw std::invalid_argument("sum of no terms");
  ScalarField total = terms.front().value;
  for (std::size_t k = 1; k < terms.size(); ++k) total = total + terms[k].value;
  return total;
}

IdentityResidual prop21_residual(const pme::Trajectory& traj, double a, double b, double c) {
  if (a != traj.a())
    throw std::invalid_argument("prop21_residual: a differs from the trajectory's equation");
  const auto F = F_history(traj, b, c);
  auto r = start("prop21", traj);
  const auto w = residual_window(traj);
  for (std::size_t j = w.first; j < w.last; ++j) {
    const auto lhs = L_operator(F, traj, j);
    const auto terms = prop21_terms(traj, j, F[j], a, b, c);
    offer(r, lhs, sum(terms), traj.state(j), traj.time(j));
  }
  return r;
}

IdentityResidual prop22_residual(const pme::Trajectory& traj, double b) {
  if (traj.a() != 1.0) throw std::invalid_argument("prop22_residual needs a = 1");
  const auto F = F_history(traj, b, 1.0 - b);
  auto r = start("prop22", traj);
  const auto w = residual_window(traj);
  for (std::size_t j = w.first; j < w.last; ++j) {
    const auto lhs = L_operator(F, traj, j);
    const auto terms = prop22_terms(traj, j, F[j], b);
    offer(r, lhs, sum(terms), traj.state(j), traj.time(j));
  }
  return r;
}

IdentityResidual prop21_vs_prop22(const pme::Trajectory& traj, double b) {
  if (traj.a() != 1.0) throw std::invalid_argument("prop21_vs_prop22 needs a = 1");
  auto r = start("prop21_vs_prop22", traj);
  const auto w = residual_window(traj);
  const double q = traj.p() - 1.0, c = 1.0 - b;
  for (std::size_t j = w.first; j < w.last; ++j) {
    // The rearrangement substitutes the pressure equation for v_t, so both
    // sides take F in its expanded form; the differenced v_t would leave an
    // O(h^2 + dt^2) gap that is not part of the algebra being checked.
    const auto& m = traj.state(j);
    const auto& v = traj.v(j);
    const auto R = geometry::scalar_curvature(m);
    const auto F = -b * q * geometry::laplacian(v, m) +
                   (1.0 - b) * (geometry::gradient_norm_sq(v, m) / v) - b * q * R + c * (R / v);
    const auto t21 = prop21_terms(traj, j, F, 1.0, b, c);
    const auto t22 = prop22_terms(traj, j, F, b);
    offer(r, sum(t21) - sum(t22), traj.state(j), traj.time(j));
  }
  return r;
}

IdentityResidual bochner_residual(const ScalarField& f, const ManifoldState& m) {
  m.require_on_grid(f);
  const auto G = geometry::gradient_norm_sq(f, m);
  const auto lap = geometry::laplacian(f, m);
  const auto lhs = geometry::laplacian(G, m);
  const auto rhs = 2.0 * geometry::gradient_dot(lap, f, m) + 2.0 * geometry::hessian_norm_sq(f, m) +
                   2.0 * geometry::ricci_quadratic(f, m);
  IdentityResidual r;
  r.id = "bochner";
  r.intervals = m.intervals();
  offer(r, lhs, rhs, m, m.time());
  return r;
}

YzCheck yz_decomposition_check(const pme::Trajectory& traj, double b) {
  const double p = traj.p();
  const auto F = F_history(traj, b, 1.0 - b);
  YzCheck out{start("yz_decomposition", traj), std::nullopt};
  if (b == 1.0) out.b1 = start("yz_b1_pressure", traj);
  const auto w = residual_window(traj);
  for (std::size_t j = w.first; j < w.last; ++j) {
    const auto& m = traj.state(j);
    const auto& v = traj.v(j);
    const auto R = geometry::scalar_curvature(m);
    const auto y = geometry::gradient_norm_sq(v, m) / v + R / v;
    const auto z = traj.v_t(j) / v + R / v;
    offer(out.algebraic, F[j], y - b * z, m, traj.time(j));
    if (out.b1)
      offer(*out.b1, y - z, -(p - 1.0) * geometry::laplacian(v, m) - traj.a() * (p - 1.0) * R,
            m, traj.time(j));
  }
  return out;
}

IdentityResidual convergence_study(const std::function<IdentityResidual(std::size_t)>& level,
                                   std::size_t levels) {
  if (levels == 0) throw std::invalid_argument("convergence_study needs at least one level");
  std::vector<double> errors;
  IdentityResidual finest;
  for (std::size_t k = 0; k < levels; ++k) {
    finest = level(k);
    errors.push_back(finest.max_abs_residual);
  }
  if (levels >= 2) finest.measured_order = measured_order(errors, 2.0);
  return finest;
}

pme::Trajectory refined_run(const pme::PmeParams& base,
                            const std::function<ManifoldState(std::size_t)>& make,
                            std::size_t intervals0, std::size_t k) {
  auto params = base;
  params.dt = base.dt / std::pow(4.0, static_cast<double>(k));
  params.store_every = 1;
  return pme::run(params, make(intervals0 << k));
}

SphereOracle homogeneous_sphere_oracle(int n, double p, double a, double b, double c,
                                       double rho0_sq, double v0, double t) {
  const double rho_sq = rho0_sq - 2.0 * (n - 1.0) * t;
  if (!(rho_sq > 0.0)) throw std::domain_error("homogeneous sphere oracle past extinction");
  SphereOracle o;
  o.R = n * (n - 1.0) / rho_sq;
  o.v = v0 * std::pow(rho_sq / rho0_sq, -a * (p - 1.0) * n / 2.0);
  o.F = -a * b * (p - 1.0) * o.R + c * o.R / o.v;
  // R' = 2R^2/n and v' = a(p-1) R v.
  const double R2 = o.R * o.R;
  o.LF = -2.0 * a * b * (p - 1.0) * R2 / n + c * (2.0 * R2 / (n * o.v) - a * (p - 1.0) * R2 / o.v);
  return o;
}

}  // namespace rfpme::identities
