#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rfpme {

enum class ManifoldKind { FlatTorus, RoundSphere, RotSymSurface };

std::string to_string(ManifoldKind kind);

/// Identity of a reduced grid. Fields on states of the same family and
/// resolution are interchangeable across time, so time is not part of it.
struct GridTag {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  std::size_t nodes = 0;
  double spacing = 0.0;

  friend bool operator==(const GridTag&, const GridTag&) = default;
};

/// Real values on the nodes of one grid. Values are always finite.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridTag grid, std::vector<double> values);

  static ScalarField constant(GridTag grid, double value);

  const GridTag& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  double min() const;
  double max() const;
  double max_abs() const;

  // Pointwise transforms; the result is re-validated for finiteness.
  ScalarField map(const std::function<double(double)>& fn) const;

 private:
  GridTag grid_;
  std::vector<double> values_;
};

// Throws GridMismatch unless both fields share a grid.
void require_same_grid(const ScalarField& a, const ScalarField& b);

ScalarField zip(const ScalarField& a, const ScalarField& b,
                const std::function<double(double, double)>& fn);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(const ScalarField& a, const ScalarField& b);
ScalarField operator/(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a);
ScalarField operator+(const ScalarField& a, double s);
ScalarField operator+(double s, const ScalarField& a);
ScalarField operator-(const ScalarField& a, double s);
ScalarField operator-(double s, const ScalarField& a);
ScalarField operator*(const ScalarField& a, double s);
ScalarField operator*(double s, const ScalarField& a);
ScalarField operator/(const ScalarField& a, double s);
ScalarField operator/(double s, const ScalarField& a);

}  // namespace rfpme
