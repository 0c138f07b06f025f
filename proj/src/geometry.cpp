#include "rfpme/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rfpme/kernels.hpp"

namespace rfpme::geometry {
namespace {

// Centered f_s; zero at the poles where symmetric functions are stationary.
std::vector<double> first_derivative(std::span<const double> f, const ManifoldState& m) {
  const std::size_t n = f.size();
  const double scale = 1.0 / (2.0 * m.spacing());
  std::vector<double> d(n, 0.0);
  kernels::active().centered_difference(f.data(), scale, d.data(), n);
  if (m.periodic()) {
    d[0] = (f[1] - f[n - 1]) * scale;
    d[n - 1] = (f[0] - f[n - 2]) * scale;
  } else {
    d[0] = 0.0;
    d[n - 1] = 0.0;
  }
  return d;
}

// Centered f_ss; on warped grids the pole rows use the even reflection
// f_{-1} = f_1.
std::vector<double> second_derivative(std::span<const double> f, const ManifoldState& m) {
  const std::size_t n = f.size();
  const double h = m.spacing();
  const double inv_h2 = 1.0 / (h * h);
  std::vector<double> d(n, 0.0);
  kernels::active().second_difference(f.data(), inv_h2, d.data(), n);
  if (m.periodic()) {
    d[0] = ((f[1] + f[n - 1]) - (f[0] + f[0])) * inv_h2;
    d[n - 1] = ((f[0] + f[n - 2]) - (f[n - 1] + f[n - 1])) * inv_h2;
  } else {
    d[0] = 2.0 * (f[1] - f[0]) * inv_h2;
    d[n - 1] = 2.0 * (f[n - 2] - f[n - 1]) * inv_h2;
  }
  return d;
}

ScalarField pointwise(const ManifoldState& m, std::vector<double> v) { return m.field(std::move(v)); }

}  // namespace

ScalarField laplacian(const ScalarField& f, const ManifoldState& m) {
  m.require_on_grid(f);
  std::vector<double> out(f.size());
  m.reduced().background_laplacian(f.values(), out);
  const auto sigma = m.inverse_metric();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sigma[i];
  return pointwise(m, std::move(out));
}

ScalarField gradient_norm_sq(const ScalarField& f, const ManifoldState& m) {
  m.require_on_grid(f);
  auto d = first_derivative(f.values(), m);
  const auto sigma = m.inverse_metric();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = sigma[i] * (d[i] * d[i]);
  return pointwise(m, std::move(d));
}

ScalarField gradient_dot(const ScalarField& f, const ScalarField& g, const ManifoldState& m) {
  m.require_on_grid(f);
  m.require_on_grid(g);
  auto df = first_derivative(f.values(), m);
  const auto dg = first_derivative(g.values(), m);
  const auto sigma = m.inverse_metric();
  for (std::size_t i = 0; i < df.size(); ++i) df[i] = sigma[i] * (df[i] * dg[i]);
  return pointwise(m, std::move(df));
}

HessianDiagonal hessian(const ScalarField& f, const ManifoldState& m) {
  m.require_on_grid(f);
  const std::size_t n = f.size();
  const auto fs = first_derivative(f.values(), m);
  const auto fss = second_derivative(f.values(), m);
  std::vector<double> radial(n), angular(n, 0.0);
  if (m.periodic()) {
    radial = fss;
    return {pointwise(m, std::move(radial)), pointwise(m, std::move(angular)), m.dim() - 1};
  }
  const auto sigma = m.inverse_metric();
  const auto lambda_s = first_derivative(m.log_conformal(), m);
  const auto& ell = m.reduced().log_derivative;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    radial[i] = sigma[i] * (fss[i] - lambda_s[i] * fs[i]);
    angular[i] = sigma[i] * ((ell[i] + lambda_s[i]) * fs[i]);
  }
  // Both entries tend to f_ss at a pole.
  for (std::size_t i : {std::size_t{0}, n - 1}) {
    radial[i] = sigma[i] * fss[i];
    angular[i] = radial[i];
  }
  return {pointwise(m, std::move(radial)), pointwise(m, std::move(angular)),
          m.reduced().fiber_dim};
}

ScalarField hessian_norm_sq(const ScalarField& f, const ManifoldState& m) {
  const auto H = hessian(f, m);
  const double k = H.angular_multiplicity;
  return zip(H.radial, H.angular, [k](double r, double a) { return r * r + k * (a * a); });
}

ScalarField hessian_trace(const ScalarField& f, const ManifoldState& m) {
  const auto H = hessian(f, m);
  const double k = H.angular_multiplicity;
  return zip(H.radial, H.angular, [k](double r, double a) { return r + k * a; });
}

double integrate(const ScalarField& f, const ManifoldState& m) {
  m.require_on_grid(f);
  const auto& g = m.reduced();
  const auto v = f.values();
  double sum = 0.0;
  if (m.periodic()) {
    for (double x : v) sum += x;
    double cross = 1.0;
    for (std::size_t k = 1; k < g.lengths.size(); ++k) cross *= g.lengths[k];
    return sum * m.spacing() * cross;
  }
  const auto lambda = m.log_conformal();
  const double n = m.dim();
  for (std::size_t i = 0; i < v.size(); ++i) sum += g.volume[i] * std::exp(n * lambda[i]) * v[i];
  return sum * g.fiber_volume;
}

ScalarField scalar_curvature(const ManifoldState& m) {
  const auto r = m.curvature();
  return m.field(std::vector<double>(r.begin(), r.end()));
}

ScalarField ricci_quadratic(const ScalarField& f, const ManifoldState& m) {
  const double inv_n = 1.0 / m.dim();
  return scalar_curvature(m) * inv_n * gradient_norm_sq(f, m);
}

ScalarField ricci_norm_sq(const ManifoldState& m) {
  const double inv_n = 1.0 / m.dim();
  return scalar_curvature(m).map([inv_n](double r) { return r * r * inv_n; });
}

ScalarField ricci_hessian_contraction(const ScalarField& f, const ManifoldState& m) {
  const double inv_n = 1.0 / m.dim();
  return scalar_curvature(m) * inv_n * hessian_trace(f, m);
}

double length_scale(const ManifoldState& m, std::size_t node) {
  return std::exp(m.log_conformal()[node]);
}

NodeRange interior_nodes(const ManifoldState& m) {
  if (m.periodic()) return {0, m.nodes()};
  return {2, m.nodes() - 2};
}

double geodesic_distance(const ManifoldState& m, std::size_t x1, std::size_t x2) {
  if (x1 >= m.nodes() || x2 >= m.nodes())
    throw std::out_of_range("geodesic_distance: node index outside the grid");
  const auto lo = std::min(x1, x2);
  const auto hi = std::max(x1, x2);
  const double h = m.spacing();
  if (m.periodic()) {
    const double L = m.reduced().lengths[0];
    const double d = static_cast<double>(hi - lo) * h;
    return std::min(d, L - d);
  }
  if (m.kind() == ManifoldKind::RoundSphere)
    return std::sqrt(m.rho_sq()) * static_cast<double>(hi - lo) * h;
  double d = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    d += 0.5 * (length_scale(m, i) + length_scale(m, i + 1)) * h;
  return d;
}

}  // namespace rfpme::geometry
