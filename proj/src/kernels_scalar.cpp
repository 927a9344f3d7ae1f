#include "dembed/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dembed::kernels {
namespace {

void axpy(const double* y, const double* x, double a, double* out, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) out[i] = y[i] + a * x[i];
}

void rk4_combine(const double* y, const double* k1, const double* k2, const double* k3,
                 const double* k4, double h, double* out, std::size_t len) {
  const double h6 = h / 6.0;
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = y[i] + h6 * ((k1[i] + 2.0 * (k2[i] + k3[i])) + k4[i]);
  }
}

void hermite_midpoint(const double* y0, const double* y1, const double* d0, const double* d1,
                      double h, double* out, std::size_t len) {
  const double h8 = h / 8.0;
  for (std::size_t i = 0; i < len; ++i) {
    out[i] = 0.5 * (y0[i] + y1[i]) + h8 * (d0[i] - d1[i]);
  }
}

void clear_nonfinite(const double* x, unsigned char* flags, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) {
    if (!std::isfinite(x[i])) flags[i] = 0;
  }
}

double directed_distance(const double* a, std::size_t na, const double* b, std::size_t nb,
                         std::size_t dim) {
  double sup = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const double* p = a + i * dim;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nb && best > sup; ++j) {
      const double* q = b + j * dim;
      double d = 0.0;
      for (std::size_t c = 0; c < dim; ++c) d = std::max(d, std::fabs(p[c] - q[c]));
      best = std::min(best, d);
    }
    sup = std::max(sup, best);
  }
  return sup;
}

}  // namespace

namespace detail {
const KernelTable scalar_table{Isa::Scalar, axpy, rk4_combine, hermite_midpoint, clear_nonfinite,
                               directed_distance};
}  // namespace detail

}  // namespace dembed::kernels
