#include "rfpme/pme.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "rfpme/differencing.hpp"
#include "rfpme/errors.hpp"
#include "rfpme/geometry.hpp"
#include "rfpme/kernels.hpp"
#include "rfpme/ricci_flow.hpp"

namespace rfpme::pme {
namespace {

void require_positive(std::span<const double> u, double t, const char* where) {
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) {
      std::ostringstream msg;
      msg << "u lost positivity " << where << " at node " << i << ", t=" << t << " (u=" << u[i]
          << ")";
      throw PositivityLoss(msg.str());
    }
}

ScalarField stage(const ScalarField& u, double c, const ScalarField& k, double t) {
  std::vector<double> out(u.size());
  kernels::active().axpy(u.values().data(), c, k.values().data(), out.data(), out.size());
  require_positive(out, t, "in an RK4 stage");
  return ScalarField(u.grid(), std::move(out));
}

void validate(const PmeParams& params) {
  if (!(params.p > 1.0)) throw std::invalid_argument("PME needs p > 1");
  if (!(params.T > params.t0)) throw std::invalid_argument("PME needs T > t0");
  if (!(params.dt > 0.0)) throw std::invalid_argument("PME needs dt > 0");
  if (params.store_every == 0) throw std::invalid_argument("store_every must be at least 1");
  if (!(params.c_cfl > 0.0)) throw std::invalid_argument("c_cfl must be positive");
}

// Ratio g_ss(T) / g_ss(t0) predicted from the volume evolution.
double forecast_shrink(const ManifoldState& m, double span) {
  double s = 1.0;
  switch (m.kind()) {
    case ManifoldKind::FlatTorus: return 1.0;
    case ManifoldKind::RoundSphere: s = 1.0 - 2.0 * (m.dim() - 1) * span / m.rho_sq(); break;
    case ManifoldKind::RotSymSurface: {
      const double area = geometry::integrate(ScalarField::constant(m.grid(), 1.0), m);
      s = 1.0 - 8.0 * std::numbers::pi * span / area;
      break;
    }
  }
  if (!(s > 0.0)) {
    std::ostringstream msg;
    msg << to_string(m.kind()) << " reaches extinction at t=" << ricci_flow::extinction_time(m)
        << ", before T=" << m.time() + span;
    throw ExtinctionError(msg.str());
  }
  return s;
}

}  // namespace

ScalarField InitialData::sample(const ManifoldState& m) const {
  ScalarField u;
  switch (kind) {
    case Kind::Constant: u = ScalarField::constant(m.grid(), level); break;
    case Kind::Bump: {
      const double freq =
          m.periodic() ? 2.0 * std::numbers::pi * mode / m.reduced().lengths[0] : double(mode);
      const double c = level, amp = amplitude;
      u = m.sample([=](double x) { return c + amp * std::cos(freq * x); });
      break;
    }
    case Kind::Table:
      if (table.size() != m.nodes())
        throw std::invalid_argument("u0 table has " + std::to_string(table.size()) +
                                    " values, the grid has " + std::to_string(m.nodes()) +
                                    " nodes");
      u = m.field(table);
      break;
  }
  if (!(u.min() > 0.0)) throw std::invalid_argument("initial data must be positive");
  return u;
}

ScalarField pressure(const ScalarField& u, double p) {
  if (!(u.min() > 0.0)) throw PositivityLoss("pressure needs u > 0");
  const double c = p / (p - 1.0);
  return u.map([c, p](double x) { return c * std::pow(x, p - 1.0); });
}

ScalarField rhs(const ScalarField& u, const ManifoldState& m, double p, double a,
                const Source* source) {
  const auto up = u.map([p](double x) { return std::pow(x, p); });
  auto out = geometry::laplacian(up, m) + a * (geometry::scalar_curvature(m) * u);
  if (source) out = out + (*source)(m);
  return out;
}

double step_number(const ScalarField& u, const ManifoldState& m, double p, double dt) {
  const double h = m.spacing();
  const auto sigma = m.inverse_metric();
  const double sigma_max = *std::max_element(sigma.begin(), sigma.end());
  return dt * p * std::pow(u.max(), p - 1.0) * sigma_max / (h * h);
}

ScalarField step(const ScalarField& u, const ManifoldState& m, const ManifoldState& m_next,
                 const PmeParams& params, const Source* source) {
  m.require_on_grid(u);
  if (!m.shares_grid_with(m_next)) throw GridMismatch("PME step: metrics on different grids");
  const double t = m.time();
  const double dt = m_next.time() - t;
  if (!(dt > 0.0)) throw std::invalid_argument("PME step: m_next must be later than m");
  const double number = step_number(u, m, params.p, dt);
  const double limit = ricci_flow::explicit_stability_limit(m.dim());
  if (number > limit) {
    std::ostringstream msg;
    msg << "PME step number dt*p*u^(p-1)*g^ss/h^2 = " << number << " exceeds the stability limit "
        << limit << " at t=" << t;
    throw CflViolation(msg.str());
  }
  const auto mid = ricci_flow::interpolate_metric(m, m_next, t + 0.5 * dt);
  const double p = params.p, a = params.a;
  const auto k1 = rhs(u, m, p, a, source);
  const auto k2 = rhs(stage(u, 0.5 * dt, k1, t), mid, p, a, source);
  const auto k3 = rhs(stage(u, 0.5 * dt, k2, t), mid, p, a, source);
  const auto k4 = rhs(stage(u, dt, k3, t), m_next, p, a, source);
  std::vector<double> out(u.size());
  kernels::active().rk4_combine(u.values().data(), k1.values().data(), k2.values().data(),
                                k3.values().data(), k4.values().data(), dt / 6.0, out.data(),
                                out.size());
  require_positive(out, t + dt, "after an RK4 step");
  return ScalarField(u.grid(), std::move(out));
}

Trajectory::Trajectory(std::vector<ManifoldState> states, std::vector<ScalarField> u, double p,
                       double a, RunStats stats)
    : states_(std::move(states)), u_(std::move(u)), p_(p), a_(a), stats_(stats) {
  if (states_.size() != u_.size())
    throw std::invalid_argument("trajectory: states and solution fields differ in count");
  if (states_.size() < 3) throw std::invalid_argument("trajectory needs at least three states");
  for (std::size_t j = 0; j < states_.size(); ++j) {
    states_[j].require_on_grid(u_[j]);
    if (j > 0 && !(states_[j].time() > states_[j - 1].time()))
      throw std::invalid_argument("trajectory times must be strictly increasing");
    times_.push_back(states_[j].time());
    v_.push_back(pressure(u_[j], p_));
  }
  for (std::size_t j = 0; j < states_.size(); ++j) v_t_.push_back(time_derivative(v_, times_, j));
}

double Trajectory::v_min() const {
  double m = v_.front().min();
  for (const auto& v : v_) m = std::min(m, v.min());
  return m;
}

double Trajectory::v_max() const {
  double m = v_.front().max();
  for (const auto& v : v_) m = std::max(m, v.max());
  return m;
}

double Trajectory::r_max() const {
  double m = geometry::scalar_curvature(states_.front()).max();
  for (const auto& s : states_) m = std::max(m, geometry::scalar_curvature(s).max());
  return m;
}

Trajectory run(const PmeParams& params, const ManifoldState& m0) {
  return run(params, m0, params.u0.sample(m0));
}

Trajectory run(const PmeParams& params, const ManifoldState& m0, const ScalarField& u0,
               const Source* source) {
  validate(params);
  m0.require_on_grid(u0);
  require_positive(u0.values(), params.t0, "in the initial data");

  const double span = params.T - params.t0;
  const auto outer = static_cast<std::size_t>(std::llround(span / params.dt));
  if (outer == 0 || std::abs(static_cast<double>(outer) * params.dt - span) > 1e-9 * span) {
    std::ostringstream msg;
    msg << "T - t0 = " << span << " is not a whole multiple of dt = " << params.dt;
    throw std::invalid_argument(msg.str());
  }
  if (outer % params.store_every != 0) {
    std::ostringstream msg;
    msg << "the " << outer << " outer steps are not a multiple of store_every = "
        << params.store_every;
    throw std::invalid_argument(msg.str());
  }

  ManifoldState m = m0.at_time(params.t0);
  const int n = m.dim();
  const double shrink = forecast_shrink(m, span);
  const double u_bound = u0.max() * std::pow(shrink, -0.5 * n);
  double diffusivity = params.p * std::pow(u_bound, params.p - 1.0);
  if (m.kind() == ManifoldKind::RotSymSurface) diffusivity = std::max(diffusivity, 1.0);
  const auto sigma = m.inverse_metric();
  diffusivity *= *std::max_element(sigma.begin(), sigma.end()) / shrink;
  const double h = m.spacing();
  const double dt_cfl = params.c_cfl * h * h / diffusivity;

  RunStats stats;
  stats.outer_steps = outer;
  stats.dt_outer = span / static_cast<double>(outer);
  stats.substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(stats.dt_outer / dt_cfl - 1e-9)));
  stats.dt_step = stats.dt_outer / static_cast<double>(stats.substeps);

  std::vector<ManifoldState> states{m};
  std::vector<ScalarField> us{u0};
  ScalarField u = u0;
  const double total = static_cast<double>(outer * stats.substeps);
  for (std::size_t j = 0; j < outer; ++j) {
    for (std::size_t q = 0; q < stats.substeps; ++q) {
      const double t_next =
          params.t0 + span * (static_cast<double>(j * stats.substeps + q + 1) / total);
      const auto m_next = ricci_flow::evolve_metric(m, t_next - m.time());
      stats.max_step_number =
          std::max(stats.max_step_number, step_number(u, m, params.p, t_next - m.time()));
      u = step(u, m, m_next, params, source);
      m = m_next;
    }
    if ((j + 1) % params.store_every == 0) {
      states.push_back(m);
      us.push_back(u);
    }
  }
  return Trajectory(std::move(states), std::move(us), params.p, params.a, stats);
}

std::vector<std::pair<double, double>> mass(const Trajectory& traj) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t j = 0; j < traj.size(); ++j)
    out.emplace_back(traj.time(j), geometry::integrate(traj.u(j), traj.state(j)));
  return out;
}

double max_mass_drift(const Trajectory& traj) {
  const auto series = mass(traj);
  const double m0 = series.front().second;
  double worst = 0.0;
  for (const auto& [t, m] : series) worst = std::max(worst, std::abs(m / m0 - 1.0));
  return worst;
}

double pressure_equation_residual(const Trajectory& traj) {
  const double p = traj.p(), a = traj.a();
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < traj.size(); ++j) {
    const auto& m = traj.state(j);
    const auto& v = traj.v(j);
    const auto R = geometry::scalar_curvature(m);
    const auto right = (p - 1.0) * v * geometry::laplacian(v, m) +
                       geometry::gradient_norm_sq(v, m) + a * (p - 1.0) * R * v;
    const auto diff = traj.v_t(j) - right;
    const auto range = geometry::interior_nodes(m);
    for (std::size_t i = range.first; i < range.last; ++i) worst = std::max(worst, std::abs(diff[i]));
  }
  return worst;
}

ScalarField manufactured_source(const ExactSolution& exact, const ManifoldState& m, double p,
                                double a) {
  if (m.kind() == ManifoldKind::RotSymSurface)
    throw std::invalid_argument("manufactured solutions are supported on the torus and sphere only");
  const double t = m.time();
  const auto sigma = m.inverse_metric();
  const auto R = m.curvature();
  const std::size_t N = m.nodes();
  const int n = m.dim();
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double s = m.coordinate(i);
    const double u = exact.value(s, t);
    const double us = exact.ds(s, t);
    const double uss = exact.dss(s, t);
    const double fs = p * std::pow(u, p - 1.0) * us;
    const double fss = p * (p - 1.0) * std::pow(u, p - 2.0) * us * us + p * std::pow(u, p - 1.0) * uss;
    double lap = fss;
    if (!m.periodic()) {
      const bool pole = i == 0 || i + 1 == N;
      lap = pole ? sigma[i] * n * fss
                 : sigma[i] * (fss + (n - 1) * std::cos(s) / std::sin(s) * fs);
    }
    out[i] = exact.dt(s, t) - lap - a * R[i] * u;
  }
  return m.field(std::move(out));
}

ManufacturedResult manufactured_run(const PmeParams& params, const ManifoldState& m0,
                                    const ExactSolution& exact) {
  const auto start = m0.at_time(params.t0);
  const auto u0 = start.sample([&](double s) { return exact.value(s, params.t0); });
  const double p = params.p, a = params.a;
  const Source source = [&](const ManifoldState& m) {
    return manufactured_source(exact, m, p, a);
  };
  auto traj = run(params, start, u0, &source);
  double err = 0.0;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto& m = traj.state(j);
    const double t = traj.time(j);
    const auto& u = traj.u(j);
    for (std::size_t i = 0; i < u.size(); ++i)
      err = std::max(err, std::abs(u[i] - exact.value(m.coordinate(i), t)));
  }
  return {std::move(traj), err};
}

}  // namespace rfpme::pme
