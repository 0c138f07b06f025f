#include "rfpme/differencing.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rfpme {
namespace {

// Weights of the Lagrange derivative through (t0, t1, t2) evaluated at `at`.
std::array<double, 3> derivative_weights(double t0, double t1, double t2, double at) {
  return {((at - t1) + (at - t2)) / ((t0 - t1) * (t0 - t2)),
          ((at - t0) + (at - t2)) / ((t1 - t0) * (t1 - t2)),
          ((at - t0) + (at - t1)) / ((t2 - t0) * (t2 - t1))};
}

std::size_t stencil_start(std::size_t idx, std::size_t count) {
  if (count < 3) throw std::invalid_argument("time derivative needs at least three samples");
  if (idx >= count) throw std::out_of_range("time derivative index outside the series");
  if (idx == 0) return 0;
  if (idx + 1 == count) return count - 3;
  return idx - 1;
}

}  // namespace

ScalarField time_derivative(std::span<const ScalarField> series, std::span<const double> times,
                            std::size_t idx) {
  if (series.size() != times.size())
    throw std::invalid_argument("time derivative: series and times differ in length");
  const std::size_t s = stencil_start(idx, series.size());
  const auto w = derivative_weights(times[s], times[s + 1], times[s + 2], times[idx]);
  const auto& a = series[s];
  const auto& b = series[s + 1];
  const auto& c = series[s + 2];
  require_same_grid(a, b);
  require_same_grid(a, c);
  std::vector<double> out(a.size());
  // The weights sum to zero, so difference against the middle sample:
  // constant series then differentiate to exactly zero.
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[0] * (a[i] - b[i]) + w[2] * (c[i] - b[i]);
  return ScalarField(a.grid(), std::move(out));
}

double time_derivative(std::span<const double> series, std::span<const double> times,
                       std::size_t idx) {
  if (series.size() != times.size())
    throw std::invalid_argument("time derivative: series and times differ in length");
  const std::size_t s = stencil_start(idx, series.size());
  const auto w = derivative_weights(times[s], times[s + 1], times[s + 2], times[idx]);
  return w[0] * (series[s] - series[s + 1]) + w[2] * (series[s + 2] - series[s + 1]);
}

double measured_order(std::span<const double> errors, double ratio) {
  if (errors.size() < 2) throw std::invalid_argument("order needs at least two resolutions");
  // Exact (zero) errors carry no order information; report them as unbounded.
  for (double e : errors)
    if (!(e > 0.0)) return std::numeric_limits<double>::infinity();
  // Fit log e_k = c - q k log(ratio).
  const double m = static_cast<double>(errors.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    const double x = static_cast<double>(k) * std::log(ratio);
    const double y = std::log(errors[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace rfpme
