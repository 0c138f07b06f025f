#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "rfpme/field.hpp"

namespace rfpme {

/// Time-independent data of a symmetry-reduced grid, shared by every state
/// of one trajectory.
///
/// Sphere and surface are both treated as warped products
///   g = e^{2 lambda(s)} (ds^2 + w0(s)^2 g_{S^{k}}),   s in [0, pi],  k = n - 1,
/// on N + 1 nodes including both poles. The sphere has w0 = sin and a
/// spatially uniform lambda = ln(rho); the surface (n = 2) carries a tabulated
/// background profile w0 and evolves lambda node by node. The torus is a
/// periodic grid of N nodes along its first side.
struct ReducedGrid {
  ManifoldKind kind = ManifoldKind::FlatTorus;
  int dim = 1;
  std::size_t intervals = 0;
  double spacing = 0.0;
  std::vector<double> coords;

  // Flat torus: side lengths; fields vary along the first side only.
  std::vector<double> lengths;

  // Warped families.
  int fiber_dim = 0;
  double fiber_volume = 0.0;                  // |S^k|
  std::vector<double> warp;                   // w0 at nodes
  std::vector<double> flux_weight;            // w0^k at half nodes, index i is i + 1/2
  std::vector<double> flux_scale;             // 1 / (w0_i^k h^2), interior nodes
  std::vector<double> volume;                 // background volume weights per node
  std::vector<double> log_derivative;         // w0' / w0, interior nodes
  std::vector<double> background_curvature;   // scalar curvature of the unscaled metric

  std::size_t nodes() const noexcept { return coords.size(); }
  bool periodic() const noexcept { return kind == ManifoldKind::FlatTorus; }

  /// Conservative Laplacian of the unscaled background metric. Pole rows use
  /// the smooth-closure limit 2n (f_1 - f_0) / h^2. On the torus this is the
  /// periodic second difference.
  void background_laplacian(std::span<const double> f, std::span<double> out) const;
};

/// A model manifold at one instant. Immutable; copies share the grid.
class ManifoldState {
 public:
  static ManifoldState flat_torus(std::vector<double> lengths, std::size_t intervals,
                                  double time = 0.0);
  static ManifoldState round_sphere(int dim, double rho_sq, std::size_t intervals,
                                    double time = 0.0);
  /// `warp` holds w0 at the N + 1 nodes of s in [0, pi].
  static ManifoldState rotsym_surface(std::vector<double> warp, double time = 0.0);
  static ManifoldState rotsym_surface(const std::function<double(double)>& profile,
                                      std::size_t intervals, double time = 0.0);

  ManifoldState at_time(double time) const;
  ManifoldState with_rho_sq(double rho_sq, double time) const;
  ManifoldState with_log_conformal(std::vector<double> lambda, double time) const;

  ManifoldKind kind() const noexcept { return grid_->kind; }
  int dim() const noexcept { return grid_->dim; }
  std::size_t intervals() const noexcept { return grid_->intervals; }
  std::size_t nodes() const noexcept { return grid_->nodes(); }
  double spacing() const noexcept { return grid_->spacing; }
  double coordinate(std::size_t i) const noexcept { return grid_->coords[i]; }
  double time() const noexcept { return time_; }
  bool periodic() const noexcept { return grid_->periodic(); }
  GridTag grid() const noexcept { return {grid_->kind, grid_->nodes(), grid_->spacing}; }
  const ReducedGrid& reduced() const noexcept { return *grid_; }
  bool shares_grid_with(const ManifoldState& other) const noexcept { return grid_ == other.grid_; }

  /// Sphere only: the conformal factor of the round metric.
  double rho_sq() const noexcept { return rho_sq_; }

  /// ln of the length scale per node: lambda for the surface, ln(rho) for the
  /// sphere, zero for the torus.
  std::span<const double> log_conformal() const noexcept { return lambda_; }
  /// g^{ss} per node (e^{-2 lambda}).
  std::span<const double> inverse_metric() const noexcept { return sigma_; }
  /// Scalar curvature per node.
  std::span<const double> curvature() const noexcept { return curvature_; }
  double min_scale_sq() const noexcept;

  ScalarField field(std::vector<double> values) const;
  ScalarField sample(const std::function<double(double)>& fn) const;
  void require_on_grid(const ScalarField& f) const;

 private:
  explicit ManifoldState(std::shared_ptr<const ReducedGrid> grid) : grid_(std::move(grid)) {}
  void set_uniform_scale(double rho_sq);

  std::shared_ptr<const ReducedGrid> grid_;
  double time_ = 0.0;
  double rho_sq_ = 1.0;
  std::vector<double> lambda_;
  std::vector<double> sigma_;
  std::vector<double> curvature_;
};

/// Built-in surface profiles. Each is odd about both poles with unit slope there.
namespace profiles {
double round(double s);
/// sin(s) (1 + eps sin^2 s); positive curvature for |eps| < 1/6.
std::function<double(double)> perturbed(double eps);
/// sin(s) (1 + eps sin^2 s cos^2 s); a neck at the equator for eps large enough.
std::function<double(double)> dumbbell(double eps);
}  // namespace profiles

}  // namespace rfpme
