#pragma once

// Inner-loop kernels for the 1D reduced stencils.
//
// Every variant evaluates the same expression tree in the same order with no
// fused multiply-add, so scalar and SIMD tables produce bitwise identical
// output. Stencil kernels write only the interior range [1, n-1); callers
// own the boundary nodes.

#include <cstddef>
#include <string_view>

namespace rfpme::kernels {

struct KernelTable {
  const char* name;

  // out[i] = scale[i] * (w[i] * (f[i+1] - f[i]) - w[i-1] * (f[i] - f[i-1]))
  void (*flux_divergence)(const double* f, const double* w, const double* scale,
                          double* out, std::size_t n);

  // out[i] = (f[i+1] - f[i-1]) * scale
  void (*centered_difference)(const double* f, double scale, double* out,
                              std::size_t n);

  // out[i] = ((f[i+1] + f[i-1]) - (f[i] + f[i])) * scale
  void (*second_difference)(const double* f, double scale, double* out,
                            std::size_t n);

  // out[i] = x[i] + a * y[i], full range [0, n)
  void (*axpy)(const double* x, double a, const double* y, double* out,
               std::size_t n);

  // out[i] = x[i] + y[i] * z[i], full range [0, n)
  void (*add_product)(const double* x, const double* y, const double* z,
                      double* out, std::size_t n);

  // out[i] = u[i] + c * (((k1[i] + (k2[i] + k2[i])) + (k3[i] + k3[i])) + k4[i])
  void (*rk4_combine)(const double* u, const double* k1, const double* k2,
                      const double* k3, const double* k4, double c, double* out,
                      std::size_t n);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

// Selected once per process: the widest supported table, unless the
// RFPME_KERNELS environment variable names one of scalar|avx2|neon.
const KernelTable& active() noexcept;

}  // namespace rfpme::kernels
