#include "rfpme/kernels.hpp"

namespace rfpme::kernels {
namespace {

void flux_divergence(const double* f, const double* w, const double* scale,
                     double* out, std::size_t n) {
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double up = w[i] * (f[i + 1] - f[i]);
    const double down = w[i - 1] * (f[i] - f[i - 1]);
    out[i] = scale[i] * (up - down);
  }
}

void centered_difference(const double* f, double scale, double* out,
                         std::size_t n) {
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) * scale;
}

void second_difference(const double* f, double scale, double* out,
                       std::size_t n) {
  for (std::size_t i = 1; i + 1 < n; ++i)
    out[i] = ((f[i + 1] + f[i - 1]) - (f[i] + f[i])) * scale;
}

void axpy(const double* x, double a, const double* y, double* out,
          std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

void add_product(const double* x, const double* y, const double* z,
                 double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i] * z[i];
}

void rk4_combine(const double* u, const double* k1, const double* k2,
                 const double* k3, const double* k4, double c, double* out,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = ((k1[i] + (k2[i] + k2[i])) + (k3[i] + k3[i])) + k4[i];
    out[i] = u[i] + c * s;
  }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{"scalar",   flux_divergence, centered_difference,
                                 second_difference, axpy, add_product,
                                 rk4_combine};
  return table;
}

}  // namespace rfpme::kernels
