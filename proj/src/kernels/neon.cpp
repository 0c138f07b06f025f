// AArch64 only; NEON is part of the base ISA there.
#include <arm_neon.h>

#include "rfpme/kernels.hpp"

namespace rfpme::kernels::neon {
namespace {

constexpr std::size_t kLanes = 2;

void flux_divergence(const double* f, const double* w, const double* scale,
                     double* out, std::size_t n) {
  if (n < 3) return;
  const std::size_t end = n - 1;
  std::size_t i = 1;
  for (; i + kLanes <= end; i += kLanes) {
    const float64x2_t fm = vld1q_f64(f + i - 1);
    const float64x2_t f0 = vld1q_f64(f + i);
    const float64x2_t fp = vld1q_f64(f + i + 1);
    const float64x2_t up = vmulq_f64(vld1q_f64(w + i), vsubq_f64(fp, f0));
    const float64x2_t down = vmulq_f64(vld1q_f64(w + i - 1), vsubq_f64(f0, fm));
    vst1q_f64(out + i, vmulq_f64(vld1q_f64(scale + i), vsubq_f64(up, down)));
  }
  for (; i < end; ++i) {
    const double up = w[i] * (f[i + 1] - f[i]);
    const double down = w[i - 1] * (f[i] - f[i - 1]);
    out[i] = scale[i] * (up - down);
  }
}

void centered_difference(const double* f, double scale, double* out,
                         std::size_t n) {
  if (n < 3) return;
  const std::size_t end = n - 1;
  const float64x2_t s = vdupq_n_f64(scale);
  std::size_t i = 1;
  for (; i + kLanes <= end; i += kLanes)
    vst1q_f64(out + i, vmulq_f64(vsubq_f64(vld1q_f64(f + i + 1), vld1q_f64(f + i - 1)), s));
  for (; i < end; ++i) out[i] = (f[i + 1] - f[i - 1]) * scale;
}

void second_difference(const double* f, double scale, double* out,
                       std::size_t n) {
  if (n < 3) return;
  const std::size_t end = n - 1;
  const float64x2_t s = vdupq_n_f64(scale);
  std::size_t i = 1;
  for (; i + kLanes <= end; i += kLanes) {
    const float64x2_t f0 = vld1q_f64(f + i);
    const float64x2_t outer = vaddq_f64(vld1q_f64(f + i + 1), vld1q_f64(f + i - 1));
    vst1q_f64(out + i, vmulq_f64(vsubq_f64(outer, vaddq_f64(f0, f0)), s));
  }
  for (; i < end; ++i) out[i] = ((f[i + 1] + f[i - 1]) - (f[i] + f[i])) * scale;
}

void axpy(const double* x, double a, const double* y, double* out,
          std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(x + i), vmulq_f64(av, vld1q_f64(y + i))));
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void add_product(const double* x, const double* y, const double* z,
                 double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes)
    vst1q_f64(out + i,
              vaddq_f64(vld1q_f64(x + i), vmulq_f64(vld1q_f64(y + i), vld1q_f64(z + i))));
  for (; i < n; ++i) out[i] = x[i] + y[i] * z[i];
}

void rk4_combine(const double* u, const double* k1, const double* k2,
                 const double* k3, const double* k4, double c, double* out,
                 std::size_t n) {
  const float64x2_t cv = vdupq_n_f64(c);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const float64x2_t a2 = vld1q_f64(k2 + i);
    const float64x2_t a3 = vld1q_f64(k3 + i);
    float64x2_t s = vaddq_f64(vld1q_f64(k1 + i), vaddq_f64(a2, a2));
    s = vaddq_f64(s, vaddq_f64(a3, a3));
    s = vaddq_f64(s, vld1q_f64(k4 + i));
    vst1q_f64(out + i, vaddq_f64(vld1q_f64(u + i), vmulq_f64(cv, s)));
  }
  for (; i < n; ++i) {
    const double s = ((k1[i] + (k2[i] + k2[i])) + (k3[i] + k3[i])) + k4[i];
    out[i] = u[i] + c * s;
  }
}

}  // namespace

const KernelTable& table() noexcept {
  static const KernelTable t{"neon",   flux_divergence, centered_difference,
                             second_difference, axpy, add_product,
                             rk4_combine};
  return t;
}

}  // namespace rfpme::kernels::neon
