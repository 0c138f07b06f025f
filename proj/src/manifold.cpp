#include "rfpme/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rfpme/errors.hpp"
#include "rfpme/kernels.hpp"

namespace rfpme {
namespace {

constexpr std::size_t kMinIntervals = 16;

void require_intervals(std::size_t intervals) {
  if (intervals < kMinIntervals)
    throw std::invalid_argument("grid needs at least " + std::to_string(kMinIntervals) +
                                " intervals, got " + std::to_string(intervals));
}

double sphere_volume(int k) {
  // |S^k| = 2 pi^{(k+1)/2} / Gamma((k+1)/2)
  const double half = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

// Pole volume weight matching the conservative pole row 2n (f1 - f0) / h^2.
double pole_volume(double half_weight, double h, int n) { return half_weight * h / (2.0 * n); }

std::shared_ptr<ReducedGrid> warped_grid(ManifoldKind kind, int dim, std::size_t intervals) {
  auto g = std::make_shared<ReducedGrid>();
  g->kind = kind;
  g->dim = dim;
  g->intervals = intervals;
  g->spacing = std::numbers::pi / static_cast<double>(intervals);
  g->coords.resize(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) g->coords[i] = static_cast<double>(i) * g->spacing;
  g->fiber_dim = dim - 1;
  g->fiber_volume = sphere_volume(dim - 1);
  return g;
}

}  // namespace

void ReducedGrid::background_laplacian(std::span<const double> f, std::span<double> out) const {
  const auto& k = kernels::active();
  const std::size_t n = nodes();
  const double h = spacing;
  if (periodic()) {
    const double inv_h2 = 1.0 / (h * h);
    k.second_difference(f.data(), inv_h2, out.data(), n);
    out[0] = ((f[1] + f[n - 1]) - (f[0] + f[0])) * inv_h2;
    out[n - 1] = ((f[0] + f[n - 2]) - (f[n - 1] + f[n - 1])) * inv_h2;
    return;
  }
  k.flux_divergence(f.data(), flux_weight.data(), flux_scale.data(), out.data(), n);
  const double pole = 2.0 * dim / (h * h);
  out[0] = pole * (f[1] - f[0]);
  out[n - 1] = pole * (f[n - 2] - f[n - 1]);
}

ManifoldState ManifoldState::flat_torus(std::vector<double> lengths, std::size_t intervals,
                                        double time) {
  require_intervals(intervals);
  if (lengths.empty()) throw std::invalid_argument("flat torus needs at least one side length");
  for (double L : lengths)
    if (!(L > 0.0) || !std::isfinite(L))
      throw std::invalid_argument("flat torus side lengths must be positive");
  auto g = std::make_shared<ReducedGrid>();
  g->kind = ManifoldKind::FlatTorus;
  g->dim = static_cast<int>(lengths.size());
  g->intervals = intervals;
  g->spacing = lengths[0] / static_cast<double>(intervals);
  g->coords.resize(intervals);
  for (std::size_t i = 0; i < intervals; ++i) g->coords[i] = static_cast<double>(i) * g->spacing;
  g->lengths = std::move(lengths);
  ManifoldState m(std::move(g));
  m.time_ = time;
  m.set_uniform_scale(1.0);
  std::fill(m.curvature_.begin(), m.curvature_.end(), 0.0);
  return m;
}

ManifoldState ManifoldState::round_sphere(int dim, double rho_sq, std::size_t intervals,
                                          double time) {
  require_intervals(intervals);
  if (dim < 2) throw std::invalid_argument("round sphere needs dimension n >= 2");
  auto g = warped_grid(ManifoldKind::RoundSphere, dim, intervals);
  const std::size_t n = g->nodes();
  const double h = g->spacing;
  const int k = g->fiber_dim;
  g->warp.resize(n);
  g->flux_weight.resize(intervals);
  g->flux_scale.assign(n, 0.0);
  g->volume.resize(n);
  g->log_derivative.assign(n, 0.0);
  g->background_curvature.assign(n, dim * (dim - 1.0));
  for (std::size_t i = 0; i < n; ++i) g->warp[i] = std::sin(g->coords[i]);
  g->warp.front() = 0.0;
  g->warp.back() = 0.0;
  for (std::size_t i = 0; i < intervals; ++i)
    g->flux_weight[i] = std::pow(std::sin((static_cast<double>(i) + 0.5) * h), k);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double wk = std::pow(g->warp[i], k);
    g->flux_scale[i] = 1.0 / (wk * h * h);
    g->volume[i] = wk * h;
    g->log_derivative[i] = std::cos(g->coords[i]) / g->warp[i];
  }
  g->volume.front() = pole_volume(g->flux_weight.front(), h, dim);
  g->volume.back() = pole_volume(g->flux_weight.back(), h, dim);
  ManifoldState m(std::move(g));
  m.time_ = time;
  m.set_uniform_scale(rho_sq);
  return m;
}

ManifoldState ManifoldState::rotsym_surface(std::vector<double> warp, double time) {
  if (warp.size() < kMinIntervals + 1)
    throw std::invalid_argument("surface profile needs at least 17 nodes");
  const std::size_t intervals = warp.size() - 1;
  auto g = warped_grid(ManifoldKind::RotSymSurface, 2, intervals);
  const std::size_t n = g->nodes();
  const double h = g->spacing;

  const double scale = *std::max_element(warp.begin(), warp.end());
  if (std::abs(warp.front()) > 1e-12 * scale || std::abs(warp.back()) > 1e-12 * scale)
    throw std::invalid_argument("surface profile must vanish at both poles");
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (!(warp[i] > 0.0) || !std::isfinite(warp[i]))
      throw std::invalid_argument("surface profile must be positive in the interior (node " +
                                  std::to_string(i) + ")");
  // Odd extension through each pole: w'(0) = (8 w_1 - w_2) / (6h) + O(h^4).
  const double slope0 = (8.0 * warp[1] - warp[2]) / (6.0 * h);
  const double slopeN = (8.0 * warp[n - 2] - warp[n - 3]) / (6.0 * h);
  if (std::abs(slope0 - 1.0) > 1e-2 || std::abs(slopeN - 1.0) > 1e-2)
    throw std::invalid_argument("surface profile must close smoothly (|w'| = 1 at the poles)");
  warp.front() = 0.0;
  warp.back() = 0.0;

  g->warp = std::move(warp);
  const auto& w = g->warp;
  g->flux_weight.resize(intervals);
  g->flux_scale.assign(n, 0.0);
  g->volume.resize(n);
  g->log_derivative.assign(n, 0.0);
  g->background_curvature.resize(n);
  for (std::size_t i = 0; i < intervals; ++i) g->flux_weight[i] = 0.5 * (w[i] + w[i + 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    g->flux_scale[i] = 1.0 / (w[i] * h * h);
    g->volume[i] = w[i] * h;
    g->log_derivative[i] = (w[i + 1] - w[i - 1]) / (2.0 * h * w[i]);
    g->background_curvature[i] = -2.0 * (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h * w[i]);
  }
  // The curvature is even about each pole, so the pole value comes from the
  // even quartic fit (15 R_1 - 6 R_2 + R_3) / 10. Taking the L'Hopital limit
  // with an odd-reflected w instead reproduces R_1 exactly: an O(h^2) kink
  // that the pole row of the Laplacian relaxes on an O(h^2) time scale, seen
  // as an O(1) transient in dR/dt.
  auto& r0 = g->background_curvature;
  r0.front() = ((15.0 * r0[1] - 6.0 * r0[2]) + r0[3]) / 10.0;
  r0.back() = ((15.0 * r0[n - 2] - 6.0 * r0[n - 3]) + r0[n - 4]) / 10.0;
  g->volume.front() = pole_volume(g->flux_weight.front(), h, 2);
  g->volume.back() = pole_volume(g->flux_weight.back(), h, 2);

  ManifoldState m(std::move(g));
  return m.with_log_conformal(std::vector<double>(n, 0.0), time);
}

ManifoldState ManifoldState::rotsym_surface(const std::function<double(double)>& profile,
                                            std::size_t intervals, double time) {
  require_intervals(intervals);
  std::vector<double> warp(intervals + 1);
  const double h = std::numbers::pi / static_cast<double>(intervals);
  for (std::size_t i = 0; i <= intervals; ++i) warp[i] = profile(static_cast<double>(i) * h);
  return rotsym_surface(std::move(warp), time);
}

ManifoldState ManifoldState::at_time(double time) const {
  ManifoldState m = *this;
  m.time_ = time;
  return m;
}

ManifoldState ManifoldState::with_rho_sq(double rho_sq, double time) const {
  if (kind() != ManifoldKind::RoundSphere)
    throw std::logic_error("with_rho_sq applies to the round sphere only");
  ManifoldState m = *this;
  m.time_ = time;
  m.set_uniform_scale(rho_sq);
  return m;
}

ManifoldState ManifoldState::with_log_conformal(std::vector<double> lambda, double time) const {
  if (kind() != ManifoldKind::RotSymSurface)
    throw std::logic_error("with_log_conformal applies to rotationally symmetric surfaces only");
  if (lambda.size() != nodes()) throw GridMismatch("conformal factor has the wrong length");
  for (double x : lambda)
    if (!std::isfinite(x)) throw PositivityLoss("surface warp lost positivity (non-finite scale)");
  ManifoldState m(grid_);
  m.time_ = time;
  m.lambda_ = std::move(lambda);
  const std::size_t n = nodes();
  m.sigma_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.sigma_[i] = std::exp(-2.0 * m.lambda_[i]);
  // R = e^{-2 lambda} (R0 - 2 Lap0 lambda) for a conformal change in dimension 2.
  std::vector<double> lap(n);
  grid_->background_laplacian(m.lambda_, lap);
  m.curvature_.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    m.curvature_[i] = m.sigma_[i] * (grid_->background_curvature[i] - 2.0 * lap[i]);
  return m;
}

void ManifoldState::set_uniform_scale(double rho_sq) {
  if (!(rho_sq > 0.0) || !std::isfinite(rho_sq))
    throw ExtinctionError("round sphere conformal factor rho^2 = " + std::to_string(rho_sq) +
                          " is not positive");
  rho_sq_ = rho_sq;
  const std::size_t n = nodes();
  lambda_.assign(n, 0.5 * std::log(rho_sq));
  sigma_.assign(n, 1.0 / rho_sq);
  const double r = kind() == ManifoldKind::RoundSphere ? dim() * (dim() - 1.0) / rho_sq : 0.0;
  curvature_.assign(n, r);
}

double ManifoldState::min_scale_sq() const noexcept {
  return 1.0 / *std::max_element(sigma_.begin(), sigma_.end());
}

ScalarField ManifoldState::field(std::vector<double> values) const {
  return ScalarField(grid(), std::move(values));
}

ScalarField ManifoldState::sample(const std::function<double(double)>& fn) const {
  std::vector<double> v(nodes());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(coordinate(i));
  return field(std::move(v));
}

void ManifoldState::require_on_grid(const ScalarField& f) const {
  if (!(f.grid() == grid()))
    throw GridMismatch("field does not live on this " + to_string(kind()) + " grid (" +
                       std::to_string(f.size()) + " values, grid has " +
                       std::to_string(nodes()) + " nodes)");
}

namespace profiles {

double round(double s) { return std::sin(s); }

std::function<double(double)> perturbed(double eps) {
  return [eps](double s) {
    const double sn = std::sin(s);
    return sn * (1.0 + eps * sn * sn);
  };
}

std::function<double(double)> dumbbell(double eps) {
  return [eps](double s) {
    const double sn = std::sin(s);
    const double cs = std::cos(s);
    return sn * (1.0 + eps * sn * sn * cs * cs);
  };
}

}  // namespace profiles
}  // namespace rfpme
