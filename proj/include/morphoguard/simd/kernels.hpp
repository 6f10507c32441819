#pragma once

// Data-parallel inner loops of the tensor engine. Each kernel set implements the
// same contract; `scalar` is the reference and the AVX2 set is checked against it
// by the kernel equivalence tests. All matrices are row-major.

#include <cstddef>
#include <string_view>

#include "morphoguard/common.hpp"

namespace morphoguard::simd {

struct KernelSet {
  const char* name;

  /// C = alpha * op(A) * op(B) + beta * C, op(X) = X or Xᵀ. op(A) is m×k, op(B) k×n.
  /// beta == 0 overwrites C without reading it.
  void (*gemm)(bool trans_a, bool trans_b, int m, int n, int k, real alpha, const real* a, int lda, const real* b,
               int ldb, real beta, real* c, int ldc);

  /// y[r, :] += bias for every row.
  void (*add_row_bias)(real* y, const real* bias, int rows, int cols);
  /// out[c] += Σ_r x[r, c].
  void (*accumulate_column_sums)(const real* x, int rows, int cols, real* out);
  /// y = max(x, 0).
  void (*relu_forward)(const real* x, real* y, std::size_t n);
  /// dx = dy where x > 0, else 0.
  void (*relu_backward)(const real* x, const real* dy, real* dx, std::size_t n);
  /// y += a * x.
  void (*axpy)(real a, const real* x, real* y, std::size_t n);
  /// y = x * scale + shift, with scale/shift of length `cols` broadcast over rows.
  void (*scale_shift_rows)(const real* x, const real* scale, const real* shift, real* y, int rows, int cols);
  /// Per row: mean, rstd = 1/sqrt(var + eps), xhat = (x − mean) * rstd (biased variance).
  void (*normalize_rows)(const real* x, real* xhat, real* rstd, int rows, int cols, real eps);
  /// Backward of normalize_rows given dL/dxhat: dx = rstd/W · (W·g − Σg − xhat·Σ(g·xhat)).
  void (*normalize_rows_backward)(const real* xhat, const real* rstd, const real* dxhat, real* dx, int rows,
                                  int cols);
  /// One Adam step with bias corrections c1 = 1 − β₁ᵗ, c2 = 1 − β₂ᵗ; zeroes g.
  void (*adam_update)(real* w, real* g, real* m, real* v, std::size_t n, real lr, real beta1, real beta2,
                      real eps, real c1, real c2);
  /// True if every entry is finite.
  bool (*all_finite)(const real* x, std::size_t n);
};

const KernelSet& scalar_kernels();
/// nullptr when the library was built without AVX2 support.
const KernelSet* avx2_kernels();
bool cpu_supports_avx2();

/// The set used by the tensor engine: AVX2 when compiled in and supported by the
/// CPU, unless MORPHO_SIMD=scalar is set in the environment.
const KernelSet& active();
/// Overrides the runtime choice ("scalar" or "avx2"); returns false if unavailable.
bool select(std::string_view name);

}  // namespace morphoguard::simd
