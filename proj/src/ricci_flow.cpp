#include "rfpme/ricci_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "rfpme/differencing.hpp"
#include "rfpme/errors.hpp"
#include "rfpme/geometry.hpp"
#include "rfpme/kernels.hpp"

namespace rfpme::ricci_flow {
namespace {

// d(lambda)/dt = -R/2 on the surface.
std::vector<double> lambda_rate(const ManifoldState& m) {
  const auto r = m.curvature();
  std::vector<double> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = -0.5 * r[i];
  return out;
}

std::vector<double> copy(std::span<const double> s) { return {s.begin(), s.end()}; }

ManifoldState evolve_surface(const ManifoldState& m, double dt) {
  const auto& k = kernels::active();
  const auto lambda = copy(m.log_conformal());
  const std::size_t n = lambda.size();
  const double t = m.time();
  std::vector<double> stage(n);

  const auto k1 = lambda_rate(m);
  k.axpy(lambda.data(), 0.5 * dt, k1.data(), stage.data(), n);
  const auto k2 = lambda_rate(m.with_log_conformal(stage, t + 0.5 * dt));
  k.axpy(lambda.data(), 0.5 * dt, k2.data(), stage.data(), n);
  const auto k3 = lambda_rate(m.with_log_conformal(stage, t + 0.5 * dt));
  k.axpy(lambda.data(), dt, k3.data(), stage.data(), n);
  const auto k4 = lambda_rate(m.with_log_conformal(stage, t + dt));

  std::vector<double> next(n);
  k.rk4_combine(lambda.data(), k1.data(), k2.data(), k3.data(), k4.data(), dt / 6.0, next.data(), n);
  return m.with_log_conformal(std::move(next), t + dt);
}

}  // namespace

double explicit_stability_limit(int dim) { return 2.0 / std::max(4.0, 2.0 * dim); }

double metric_step_number(const ManifoldState& m, double dt) {
  const auto sigma = m.inverse_metric();
  const double h = m.spacing();
  return dt * *std::max_element(sigma.begin(), sigma.end()) / (h * h);
}

double extinction_time(const ManifoldState& m) {
  switch (m.kind()) {
    case ManifoldKind::FlatTorus: return std::numeric_limits<double>::infinity();
    case ManifoldKind::RoundSphere: return m.time() + m.rho_sq() / (2.0 * (m.dim() - 1));
    case ManifoldKind::RotSymSurface: {
      const double area = geometry::integrate(ScalarField::constant(m.grid(), 1.0), m);
      return m.time() + area / (8.0 * std::numbers::pi);
    }
  }
  return std::numeric_limits<double>::infinity();
}

ManifoldState evolve_metric(const ManifoldState& m, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw std::invalid_argument("evolve_metric needs a positive finite dt");
  const double t_ext = extinction_time(m);
  if (m.time() + dt >= t_ext) {
    std::ostringstream msg;
    msg << to_string(m.kind()) << " reaches extinction at t=" << t_ext << " (step to t="
        << m.time() + dt << ")";
    throw ExtinctionError(msg.str());
  }
  switch (m.kind()) {
    case ManifoldKind::FlatTorus: return m.at_time(m.time() + dt);
    case ManifoldKind::RoundSphere:
      return m.with_rho_sq(m.rho_sq() - 2.0 * (m.dim() - 1) * dt, m.time() + dt);
    case ManifoldKind::RotSymSurface: {
      const double number = metric_step_number(m, dt);
      if (number > explicit_stability_limit(m.dim())) {
        std::ostringstream msg;
        msg << "surface Ricci flow step number dt*max(g^ss)/h^2 = " << number
            << " exceeds the stability limit " << explicit_stability_limit(m.dim()) << " at t="
            << m.time();
        throw CflViolation(msg.str());
      }
      return evolve_surface(m, dt);
    }
  }
  return m;
}

ManifoldState interpolate_metric(const ManifoldState& m0, const ManifoldState& m1, double t) {
  if (!m0.shares_grid_with(m1)) throw GridMismatch("interpolate_metric: states on different grids");
  const double t0 = m0.time();
  const double t1 = m1.time();
  const double span = t1 - t0;
  if (!(span > 0.0)) throw std::invalid_argument("interpolate_metric: states not time-ordered");
  if (t == t0) return m0;
  if (t == t1) return m1;
  const double theta = (t - t0) / span;
  switch (m0.kind()) {
    case ManifoldKind::FlatTorus: return m0.at_time(t);
    case ManifoldKind::RoundSphere:
      return m0.with_rho_sq((1.0 - theta) * m0.rho_sq() + theta * m1.rho_sq(), t);
    case ManifoldKind::RotSymSurface: {
      const double h00 = (1.0 + 2.0 * theta) * (1.0 - theta) * (1.0 - theta);
      const double h10 = theta * (1.0 - theta) * (1.0 - theta);
      const double h01 = theta * theta * (3.0 - 2.0 * theta);
      const double h11 = theta * theta * (theta - 1.0);
      const auto l0 = m0.log_conformal();
      const auto l1 = m1.log_conformal();
      const auto r0 = m0.curvature();
      const auto r1 = m1.curvature();
      std::vector<double> lambda(l0.size());
      for (std::size_t i = 0; i < lambda.size(); ++i)
        lambda[i] = (h00 * l0[i] + h01 * l1[i]) + span * (h10 * (-0.5 * r0[i]) + h11 * (-0.5 * r1[i]));
      return m0.with_log_conformal(std::move(lambda), t);
    }
  }
  return m0;
}

ScalarField curvature_rate(std::span<const ManifoldState> states, std::size_t idx) {
  if (idx >= states.size()) throw std::out_of_range("curvature_rate: index outside trajectory");
  const auto& m = states[idx];
  switch (m.kind()) {
    case ManifoldKind::FlatTorus: return ScalarField::constant(m.grid(), 0.0);
    case ManifoldKind::RoundSphere: {
      const double r = m.curvature()[0];
      return ScalarField::constant(m.grid(), 2.0 * r * r / m.dim());
    }
    case ManifoldKind::RotSymSurface: break;
  }
  if (states.size() < 3)
    throw std::invalid_argument("curvature_rate on a surface needs at least three stored states");
  const std::size_t s = idx == 0 ? 0 : (idx + 1 == states.size() ? idx - 2 : idx - 1);
  std::vector<ScalarField> r;
  std::vector<double> t;
  for (std::size_t j = s; j < s + 3; ++j) {
    r.push_back(geometry::scalar_curvature(states[j]));
    t.push_back(states[j].time());
  }
  return time_derivative(r, t, idx - s);
}

double scalar_evolution_residual(std::span<const ManifoldState> states) {
  if (states.size() < 3)
    throw std::invalid_argument("scalar_evolution_residual needs at least three stored states");
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < states.size(); ++j) {
    const auto& m = states[j];
    const auto R = geometry::scalar_curvature(m);
    const auto residual =
        curvature_rate(states, j) - geometry::laplacian(R, m) - 2.0 * geometry::ricci_norm_sq(m);
    worst = std::max(worst, residual.max_abs());
  }
  return worst;
}

ScalarField lyh_trace(const ManifoldState& m, const ScalarField& dRdt, const ScalarField& phi,
                      double t) {
  if (!(t > 0.0)) throw std::invalid_argument("lyh_trace needs t > 0");
  m.require_on_grid(dRdt);
  const auto R = geometry::scalar_curvature(m);
  return t * dRdt + R + 2.0 * t * geometry::gradient_dot(R, phi, m) +
         2.0 * t * geometry::ricci_quadratic(phi, m);
}

FlowHypothesisReport verify_hypotheses(std::span<const ManifoldState> states, double tol_hyp) {
  if (states.empty()) throw std::invalid_argument("verify_hypotheses: empty trajectory");
  FlowHypothesisReport rep;
  rep.tol_hyp = tol_hyp;
  rep.r_min = std::numeric_limits<double>::infinity();
  rep.r_max = -std::numeric_limits<double>::infinity();
  for (const auto& m : states) {
    const auto r = m.curvature();
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (r[i] < rep.r_min) {
        rep.r_min = r[i];
        rep.r_min_node = i;
        rep.r_min_time = m.time();
      }
      rep.r_max = std::max(rep.r_max, r[i]);
    }
    if (!(m.time() < extinction_time(m))) rep.pre_extinction = false;
  }
  rep.curvature_nonneg = rep.r_min >= -tol_hyp;
  return rep;
}

}  // namespace rfpme::ricci_flow
