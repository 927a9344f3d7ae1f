// Compiled with -mavx2 (no -mfma). Only reached after a runtime CPU check.
#include "dembed/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dembed::kernels {
namespace {

void axpy(const double* y, const double* x, double a, double* out, std::size_t len) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < len; ++i) out[i] = y[i] + a * x[i];
}

void rk4_combine(const double* y, const double* k1, const double* k2, const double* k3,
                 const double* k4, double h, double* out, std::size_t len) {
  const double h6 = h / 6.0;
  const __m256d vh6 = _mm256_set1_pd(h6);
  const __m256d two = _mm256_set1_pd(2.0);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_loadu_pd(k2 + i), _mm256_loadu_pd(k3 + i));
    s = _mm256_add_pd(_mm256_loadu_pd(k1 + i), _mm256_mul_pd(two, s));
    s = _mm256_add_pd(s, _mm256_loadu_pd(k4 + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(vh6, s)));
  }
  for (; i < len; ++i) out[i] = y[i] + h6 * ((k1[i] + 2.0 * (k2[i] + k3[i])) + k4[i]);
}

void hermite_midpoint(const double* y0, const double* y1, const double* d0, const double* d1,
                      double h, double* out, std::size_t len) {
  const double h8 = h / 8.0;
  const __m256d vh8 = _mm256_set1_pd(h8);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d mean = _mm256_mul_pd(half, _mm256_add_pd(_mm256_loadu_pd(y0 + i), _mm256_loadu_pd(y1 + i)));
    const __m256d slope = _mm256_mul_pd(vh8, _mm256_sub_pd(_mm256_loadu_pd(d0 + i), _mm256_loadu_pd(d1 + i)));
    _mm256_storeu_pd(out + i, _mm256_add_pd(mean, slope));
  }
  for (; i < len; ++i) out[i] = 0.5 * (y0[i] + y1[i]) + h8 * (d0[i] - d1[i]);
}

void clear_nonfinite(const double* x, unsigned char* flags, std::size_t len) {
  // x - x is 0 for finite x and NaN otherwise.
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d diff = _mm256_sub_pd(v, v);
    const int bad = _mm256_movemask_pd(_mm256_cmp_pd(diff, diff, _CMP_UNORD_Q));
    if (bad) {
      for (int l = 0; l < 4; ++l) {
        if (bad & (1 << l)) flags[i + l] = 0;
      }
    }
  }
  for (; i < len; ++i) {
    if (!std::isfinite(x[i])) flags[i] = 0;
  }
}

double directed_distance(const double* a, std::size_t na, const double* b, std::size_t nb,
                         std::size_t dim) {
  // Transpose b so four candidate points sit in one register per coordinate.
  const std::size_t blocks = (nb + 3) / 4;
  std::vector<double> bt(blocks * 4 * dim);
  for (std::size_t j = 0; j < blocks * 4; ++j) {
    const std::size_t src = std::min(j, nb - 1);  // pad with a duplicate of the last point
    for (std::size_t c = 0; c < dim; ++c) bt[(j / 4) * 4 * dim + c * 4 + j % 4] = b[src * dim + c];
  }
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  double sup = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const double* p = a + i * dim;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t blk = 0; blk < blocks && best > sup; ++blk) {
      const double* q = bt.data() + blk * 4 * dim;
      __m256d d = _mm256_setzero_pd();
      for (std::size_t c = 0; c < dim; ++c) {
        const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(p[c]), _mm256_loadu_pd(q + c * 4));
        d = _mm256_max_pd(d, _mm256_andnot_pd(sign_mask, diff));
      }
      alignas(32) double lanes[4];
      _mm256_store_pd(lanes, d);
      for (double v : lanes) best = std::min(best, v);
    }
    sup = std::max(sup, best);
  }
  return sup;
}

}  // namespace

namespace detail {
const KernelTable avx2_table{Isa::Avx2, axpy, rk4_combine, hermite_midpoint, clear_nonfinite,
                             directed_distance};
}  // namespace detail

}  // namespace dembed::kernels
