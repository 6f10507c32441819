#include <cmath>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::simd {

namespace {

void gemm(bool trans_a, bool trans_b, int m, int n, int k, real alpha, const real* a, int lda, const real* b,
          int ldb, real beta, real* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    real* crow = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (beta == 0.0f) {
      for (int j = 0; j < n; ++j) crow[j] = 0.0f;
    } else if (beta != 1.0f) {
      for (int j = 0; j < n; ++j) crow[j] *= beta;
    }
    for (int p = 0; p < k; ++p) {
      const real av = alpha * (trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i] : a[static_cast<std::ptrdiff_t>(i) * lda + p]);
      if (av == 0.0f) continue;
      if (!trans_b) {
        const real* brow = b + static_cast<std::ptrdiff_t>(p) * ldb;
        for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
      } else {
        for (int j = 0; j < n; ++j) crow[j] += av * b[static_cast<std::ptrdiff_t>(j) * ldb + p];
      }
    }
  }
}

void add_row_bias(real* y, const real* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) y[static_cast<std::ptrdiff_t>(r) * cols + c] += bias[c];
}

void accumulate_column_sums(const real* x, int rows, int cols, real* out) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[c] += x[static_cast<std::ptrdiff_t>(r) * cols + c];
}

void relu_forward(const real* x, real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward(const real* x, const real* dy, real* dx, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void axpy(real a, const real* x, real* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_shift_rows(const real* x, const real* scale, const real* shift, real* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(r) * cols;
    for (int c = 0; c < cols; ++c) y[o + c] = x[o + c] * scale[c] + shift[c];
  }
}

void normalize_rows(const real* x, real* xhat, real* rstd, int rows, int cols, real eps) {
  for (int r = 0; r < rows; ++r) {
    const real* xr = x + static_cast<std::ptrdiff_t>(r) * cols;
    real* hr = xhat + static_cast<std::ptrdiff_t>(r) * cols;
    double mean = 0.0;
    for (int c = 0; c < cols; ++c) mean += xr[c];
    mean /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
      const double d = xr[c] - mean;
      var += d * d;
    }
    var /= cols;
    const real rs = static_cast<real>(1.0 / std::sqrt(var + eps));
    const real mf = static_cast<real>(mean);
    for (int c = 0; c < cols; ++c) hr[c] = (xr[c] - mf) * rs;
    rstd[r] = rs;
  }
}

void normalize_rows_backward(const real* xhat, const real* rstd, const real* dxhat, real* dx, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(r) * cols;
    double sum_g = 0.0, sum_gx = 0.0;
    for (int c = 0; c < cols; ++c) {
      sum_g += dxhat[o + c];
      sum_gx += static_cast<double>(dxhat[o + c]) * xhat[o + c];
    }
    const real mg = static_cast<real>(sum_g / cols);
    const real mgx = static_cast<real>(sum_gx / cols);
    for (int c = 0; c < cols; ++c) dx[o + c] = rstd[r] * (dxhat[o + c] - mg - xhat[o + c] * mgx);
  }
}

void adam_update(real* w, real* g, real* m, real* v, std::size_t n, real lr, real beta1, real beta2, real eps,
                 real c1, real c2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    const real mhat = m[i] / c1;
    const real vhat = v[i] / c2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    g[i] = 0.0f;
  }
}

bool all_finite(const real* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet set{
      "scalar",      gemm,           add_row_bias,           accumulate_column_sums,
      relu_forward,  relu_backward,  axpy,                   scale_shift_rows,
      normalize_rows, normalize_rows_backward, adam_update, all_finite,
  };
  return set;
}

}  // namespace morphoguard::simd
