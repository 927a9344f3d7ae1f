#pragma once

// Data-parallel arithmetic used by the batched DDE integrator and the point
// set analyses. Every kernel has a portable scalar reference and, on x86-64,
// an AVX2 variant selected at runtime. The vector variants perform the same
// operations in the same order without fused multiply-add, so both produce
// bit-identical results.

#include <cstddef>
#include <string_view>

namespace dembed::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;

  /// out[i] = y[i] + a * x[i]
  void (*axpy)(const double* y, const double* x, double a, double* out, std::size_t len);

  /// out[i] = y[i] + (h / 6) * (k1[i] + 2 * (k2[i] + k3[i]) + k4[i])
  void (*rk4_combine)(const double* y, const double* k1, const double* k2, const double* k3,
                      const double* k4, double h, double* out, std::size_t len);

  /// Cubic Hermite interpolant at the cell midpoint:
  /// out[i] = 0.5 * (y0[i] + y1[i]) + (h / 8) * (d0[i] - d1[i])
  void (*hermite_midpoint)(const double* y0, const double* y1, const double* d0,
                           const double* d1, double h, double* out, std::size_t len);

  /// flags[i] = 0 if x[i] is NaN or infinite (flags are only ever cleared).
  void (*clear_nonfinite)(const double* x, unsigned char* flags, std::size_t len);

  /// max over rows a of min over rows b of the max-norm distance |a - b|_inf.
  /// Points are row-major with `dim` columns; both sets must be nonempty.
  double (*directed_distance)(const double* a, std::size_t na, const double* b, std::size_t nb,
                              std::size_t dim);
};

/// Table for a specific instruction set. Throws if the CPU lacks it.
const KernelTable& table(Isa isa);

/// Best table for this CPU, unless overridden with `select` or the
/// DEMBED_ISA=scalar environment variable.
const KernelTable& active();

bool supported(Isa isa) noexcept;

/// Pins the active table (used by tests and benchmarks).
void select(Isa isa);

namespace detail {
extern const KernelTable scalar_table;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable avx2_table;
#endif
}  // namespace detail

}  // namespace dembed::kernels
