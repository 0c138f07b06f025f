// Compiled with -mavx2 (no -mfma). Selected only after a runtime CPU check.
#include <immintrin.h>

#include "rfpme/kernels.hpp"

namespace rfpme::kernels::avx2 {
namespace {

constexpr std::size_t kLanes = 4;

void flux_divergence(const double* f, const double* w, const double* scale,
                     double* out, std::size_t n) {
  if (n < 3) return;
  const std::size_t end = n - 1;
  std::size_t i = 1;
  for (; i + kLanes <= end; i += kLanes) {
    const __m256d fm = _mm256_loadu_pd(f + i - 1);
    const __m256d f0 = _mm256_loadu_pd(f + i);
    const __m256d fp = _mm256_loadu_pd(f + i + 1);
    const __m256d wp = _mm256_loadu_pd(w + i);
    const __m256d wm = _mm256_loadu_pd(w + i - 1);
    const __m256d up = _mm256_mul_pd(wp, _mm256_sub_pd(fp, f0));
    const __m256d down = _mm256_mul_pd(wm, _mm256_sub_pd(f0, fm));
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(scale + i), _mm256_sub_pd(up, down)));
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
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 1;
  for (; i + kLanes <= end; i += kLanes) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(f + i + 1), _mm256_loadu_pd(f + i - 1));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(d, s));
  }
  for (; i < end; ++i) out[i] = (f[i + 1] - f[i - 1]) * scale;
}

void second_difference(const double* f, double scale, double* out,
                       std::size_t n) {
  if (n < 3) return;
  const std::size_t end = n - 1;
  const __m256d s = _mm256_set1_pd(scale);
  std::size_t i = 1;
  for (; i + kLanes <= end; i += kLanes) {
    const __m256d f0 = _mm256_loadu_pd(f + i);
    const __m256d outer = _mm256_add_pd(_mm256_loadu_pd(f + i + 1), _mm256_loadu_pd(f + i - 1));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_sub_pd(outer, _mm256_add_pd(f0, f0)), s));
  }
  for (; i < end; ++i) out[i] = ((f[i + 1] + f[i - 1]) - (f[i] + f[i])) * scale;
}

void axpy(const double* x, double a, const double* y, double* out,
          std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(x + i),
                                    _mm256_mul_pd(av, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

void add_product(const double* x, const double* y, const double* z,
                 double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d r = _mm256_add_pd(
        _mm256_loadu_pd(x + i), _mm256_mul_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(z + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = x[i] + y[i] * z[i];
}

void rk4_combine(const double* u, const double* k1, const double* k2,
                 const double* k3, const double* k4, double c, double* out,
                 std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d a2 = _mm256_loadu_pd(k2 + i);
    const __m256d a3 = _mm256_loadu_pd(k3 + i);
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_add_pd(a2, a2));
    s = _mm256_add_pd(s, _mm256_add_pd(a3, a3));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(u + i), _mm256_mul_pd(cv, s)));
  }
  for (; i < n; ++i) {
    const double s = ((k1[i] + (k2[i] + k2[i])) + (k3[i] + k3[i])) + k4[i];
    out[i] = u[i] + c * s;
  }
}

}  // namespace

const KernelTable& table() noexcept {
  static const KernelTable t{"avx2",   flux_divergence, centered_difference,
                             second_difference, axpy, add_product,
                             rk4_combine};
  return t;
}

}  // namespace rfpme::kernels::avx2
