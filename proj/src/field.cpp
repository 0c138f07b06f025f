#include "rfpme/field.hpp"

#include <algorithm>
#include <cmath>

#include "rfpme/errors.hpp"

namespace rfpme {

std::string to_string(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::FlatTorus: return "flat_torus";
    case ManifoldKind::RoundSphere: return "round_sphere";
    case ManifoldKind::RotSymSurface: return "rotsym_surface";
  }
  return "unknown";
}

ScalarField::ScalarField(GridTag grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.nodes)
    throw GridMismatch("field has " + std::to_string(values_.size()) +
                       " values but the grid has " + std::to_string(grid_.nodes) + " nodes");
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw NonFiniteValue("non-finite field value at node " + std::to_string(i));
}

ScalarField ScalarField::constant(GridTag grid, double value) {
  return ScalarField(grid, std::vector<double>(grid.nodes, value));
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double x : values_) m = std::max(m, std::abs(x));
  return m;
}

ScalarField ScalarField::map(const std::function<double(double)>& fn) const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), fn);
  return ScalarField(grid_, std::move(out));
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid()))
    throw GridMismatch("fields live on different grids (" + to_string(a.grid().kind) + "/" +
                       std::to_string(a.size()) + " vs " + to_string(b.grid().kind) + "/" +
                       std::to_string(b.size()) + ")");
}

ScalarField zip(const ScalarField& a, const ScalarField& b,
                const std::function<double(double, double)>& fn) {
  require_same_grid(a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(a[i], b[i]);
  return ScalarField(a.grid(), std::move(out));
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x + y; });
}
ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x - y; });
}
ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x * y; });
}
ScalarField operator/(const ScalarField& a, const ScalarField& b) {
  return zip(a, b, [](double x, double y) { return x / y; });
}
ScalarField operator-(const ScalarField& a) {
  return a.map([](double x) { return -x; });
}
ScalarField operator+(const ScalarField& a, double s) {
  return a.map([s](double x) { return x + s; });
}
ScalarField operator+(double s, const ScalarField& a) { return a + s; }
ScalarField operator-(const ScalarField& a, double s) {
  return a.map([s](double x) { return x - s; });
}
ScalarField operator-(double s, const ScalarField& a) {
  return a.map([s](double x) { return s - x; });
}
ScalarField operator*(const ScalarField& a, double s) {
  return a.map([s](double x) { return x * s; });
}
ScalarField operator*(double s, const ScalarField& a) { return a * s; }
ScalarField operator/(const ScalarField& a, double s) {
  return a.map([s](double x) { return x / s; });
}
ScalarField operator/(double s, const ScalarField& a) {
  return a.map([s](double x) { return s / x; });
}

}  // namespace rfpme
