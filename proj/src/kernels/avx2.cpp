// AVX2 + FMA kernel set. Compiled with -mavx2 -mfma; only reached after the
// runtime CPU check in dispatch.cpp.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::simd {

namespace {

// Register-blocked GEMM: packed MR×KC panels of A against KC×NR panels of B,
// 12 ymm accumulators per micro-tile.
constexpr int kMR = 6;
constexpr int kNR = 16;
constexpr int kKC = 256;
constexpr int kMC = 96;
constexpr int kNC = 1024;

inline float elem_a(bool trans, const float* a, int lda, int i, int p) {
  return trans ? a[static_cast<std::ptrdiff_t>(p) * lda + i] : a[static_cast<std::ptrdiff_t>(i) * lda + p];
}

void pack_a(bool trans, const float* a, int lda, int i0, int p0, int mc, int kc, float* out) {
  for (int ir = 0; ir < mc; ir += kMR) {
    const int rows = std::min(kMR, mc - ir);
    for (int p = 0; p < kc; ++p) {
      for (int r = 0; r < kMR; ++r) *out++ = r < rows ? elem_a(trans, a, lda, i0 + ir + r, p0 + p) : 0.0f;
    }
  }
}

void pack_b(bool trans, const float* b, int ldb, int p0, int j0, int kc, int nc, float* out) {
  for (int jr = 0; jr < nc; jr += kNR) {
    const int cols = std::min(kNR, nc - jr);
    for (int p = 0; p < kc; ++p) {
      if (!trans && cols == kNR) {
        const float* src = b + static_cast<std::ptrdiff_t>(p0 + p) * ldb + j0 + jr;
        _mm256_storeu_ps(out, _mm256_loadu_ps(src));
        _mm256_storeu_ps(out + 8, _mm256_loadu_ps(src + 8));
        out += kNR;
        continue;
      }
      for (int c = 0; c < kNR; ++c) {
        float v = 0.0f;
        if (c < cols) {
          const int j = j0 + jr + c;
          v = trans ? b[static_cast<std::ptrdiff_t>(j) * ldb + p0 + p] : b[static_cast<std::ptrdiff_t>(p0 + p) * ldb + j];
        }
        *out++ = v;
      }
    }
  }
}

void micro_kernel(int kc, const float* pa, const float* pb, float* c, int ldc, float alpha, int rows, int cols) {
  __m256 c00 = _mm256_setzero_ps(), c01 = _mm256_setzero_ps();
  __m256 c10 = _mm256_setzero_ps(), c11 = _mm256_setzero_ps();
  __m256 c20 = _mm256_setzero_ps(), c21 = _mm256_setzero_ps();
  __m256 c30 = _mm256_setzero_ps(), c31 = _mm256_setzero_ps();
  __m256 c40 = _mm256_setzero_ps(), c41 = _mm256_setzero_ps();
  __m256 c50 = _mm256_setzero_ps(), c51 = _mm256_setzero_ps();
  for (int p = 0; p < kc; ++p) {
    const __m256 b0 = _mm256_loadu_ps(pb);
    const __m256 b1 = _mm256_loadu_ps(pb + 8);
    __m256 a = _mm256_broadcast_ss(pa + 0);
    c00 = _mm256_fmadd_ps(a, b0, c00);
    c01 = _mm256_fmadd_ps(a, b1, c01);
    a = _mm256_broadcast_ss(pa + 1);
    c10 = _mm256_fmadd_ps(a, b0, c10);
    c11 = _mm256_fmadd_ps(a, b1, c11);
    a = _mm256_broadcast_ss(pa + 2);
    c20 = _mm256_fmadd_ps(a, b0, c20);
    c21 = _mm256_fmadd_ps(a, b1, c21);
    a = _mm256_broadcast_ss(pa + 3);
    c30 = _mm256_fmadd_ps(a, b0, c30);
    c31 = _mm256_fmadd_ps(a, b1, c31);
    a = _mm256_broadcast_ss(pa + 4);
    c40 = _mm256_fmadd_ps(a, b0, c40);
    c41 = _mm256_fmadd_ps(a, b1, c41);
    a = _mm256_broadcast_ss(pa + 5);
    c50 = _mm256_fmadd_ps(a, b0, c50);
    c51 = _mm256_fmadd_ps(a, b1, c51);
    pa += kMR;
    pb += kNR;
  }
  const __m256 va = _mm256_set1_ps(alpha);
  const __m256 acc[kMR][2] = {{c00, c01}, {c10, c11}, {c20, c21}, {c30, c31}, {c40, c41}, {c50, c51}};
  if (rows == kMR && cols == kNR) {
    for (int r = 0; r < kMR; ++r) {
      float* cr = c + static_cast<std::ptrdiff_t>(r) * ldc;
      _mm256_storeu_ps(cr, _mm256_fmadd_ps(va, acc[r][0], _mm256_loadu_ps(cr)));
      _mm256_storeu_ps(cr + 8, _mm256_fmadd_ps(va, acc[r][1], _mm256_loadu_ps(cr + 8)));
    }
    return;
  }
  alignas(32) float tile[kMR][kNR];
  for (int r = 0; r < kMR; ++r) {
    _mm256_store_ps(tile[r], acc[r][0]);
    _mm256_store_ps(tile[r] + 8, acc[r][1]);
  }
  for (int r = 0; r < rows; ++r) {
    float* cr = c + static_cast<std::ptrdiff_t>(r) * ldc;
    for (int j = 0; j < cols; ++j) cr[j] = std::fma(alpha, tile[r][j], cr[j]);
  }
}

void gemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha, const float* a, int lda, const float* b,
          int ldb, float beta, float* c, int ldc) {
  if (m <= 0 || n <= 0) return;
  for (int i = 0; i < m; ++i) {
    float* cr = c + static_cast<std::ptrdiff_t>(i) * ldc;
    if (beta == 0.0f) {
      std::fill(cr, cr + n, 0.0f);
    } else if (beta != 1.0f) {
      for (int j = 0; j < n; ++j) cr[j] *= beta;
    }
  }
  if (k <= 0 || alpha == 0.0f) return;

  thread_local std::vector<float> packed_a;
  thread_local std::vector<float> packed_b;
  packed_a.resize(static_cast<std::size_t>(kMC + kMR) * kKC);
  packed_b.resize(static_cast<std::size_t>(kNC + kNR) * kKC);

  for (int jc = 0; jc < n; jc += kNC) {
    const int nc = std::min(kNC, n - jc);
    for (int pc = 0; pc < k; pc += kKC) {
      const int kc = std::min(kKC, k - pc);
      pack_b(trans_b, b, ldb, pc, jc, kc, nc, packed_b.data());
      for (int ic = 0; ic < m; ic += kMC) {
        const int mc = std::min(kMC, m - ic);
        pack_a(trans_a, a, lda, ic, pc, mc, kc, packed_a.data());
        for (int jr = 0; jr < nc; jr += kNR) {
          const float* pb = packed_b.data() + static_cast<std::ptrdiff_t>(jr) * kc;
          for (int ir = 0; ir < mc; ir += kMR) {
            const float* pa = packed_a.data() + static_cast<std::ptrdiff_t>(ir) * kc;
            float* ct = c + static_cast<std::ptrdiff_t>(ic + ir) * ldc + jc + jr;
            micro_kernel(kc, pa, pb, ct, ldc, alpha, std::min(kMR, mc - ir), std::min(kNR, nc - jr));
          }
        }
      }
    }
  }
}

void add_row_bias(float* y, const float* bias, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    float* yr = y + static_cast<std::ptrdiff_t>(r) * cols;
    int c = 0;
    for (; c + 8 <= cols; c += 8)
      _mm256_storeu_ps(yr + c, _mm256_add_ps(_mm256_loadu_ps(yr + c), _mm256_loadu_ps(bias + c)));
    for (; c < cols; ++c) yr[c] += bias[c];
  }
}

void accumulate_column_sums(const float* x, int rows, int cols, float* out) {
  int c = 0;
  for (; c + 8 <= cols; c += 8) {
    __m256 acc = _mm256_loadu_ps(out + c);
    for (int r = 0; r < rows; ++r) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + static_cast<std::ptrdiff_t>(r) * cols + c));
    _mm256_storeu_ps(out + c, acc);
  }
  for (; c < cols; ++c)
    for (int r = 0; r < rows; ++r) out[c] += x[static_cast<std::ptrdiff_t>(r) * cols + c];
}

void relu_forward(const float* x, float* y, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
  for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_backward(const float* x, const float* dy, float* dx, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
    _mm256_storeu_ps(dx + i, _mm256_and_ps(mask, _mm256_loadu_ps(dy + i)));
  }
  for (; i < n; ++i) dx[i] = x[i] > 0.0f ? dy[i] : 0.0f;
}

void axpy(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_shift_rows(const float* x, const float* scale, const float* shift, float* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(r) * cols;
    int c = 0;
    for (; c + 8 <= cols; c += 8)
      _mm256_storeu_ps(y + o + c, _mm256_fmadd_ps(_mm256_loadu_ps(x + o + c), _mm256_loadu_ps(scale + c),
                                                  _mm256_loadu_ps(shift + c)));
    for (; c < cols; ++c) y[o + c] = std::fma(x[o + c], scale[c], shift[c]);
  }
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void normalize_rows(const float* x, float* xhat, float* rstd, int rows, int cols, float eps) {
  for (int r = 0; r < rows; ++r) {
    const float* xr = x + static_cast<std::ptrdiff_t>(r) * cols;
    float* hr = xhat + static_cast<std::ptrdiff_t>(r) * cols;
    __m256d acc = _mm256_setzero_pd();
    int c = 0;
    for (; c + 4 <= cols; c += 4) acc = _mm256_add_pd(acc, _mm256_cvtps_pd(_mm_loadu_ps(xr + c)));
    double mean = hsum(acc);
    for (; c < cols; ++c) mean += xr[c];
    mean /= cols;
    const __m256d vm = _mm256_set1_pd(mean);
    acc = _mm256_setzero_pd();
    c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_cvtps_pd(_mm_loadu_ps(xr + c)), vm);
      acc = _mm256_fmadd_pd(d, d, acc);
    }
    double var = hsum(acc);
    for (; c < cols; ++c) var += (xr[c] - mean) * (xr[c] - mean);
    var /= cols;
    const float rs = static_cast<float>(1.0 / std::sqrt(var + eps));
    const __m256 vrs = _mm256_set1_ps(rs);
    const __m256 vmf = _mm256_set1_ps(static_cast<float>(mean));
    c = 0;
    for (; c + 8 <= cols; c += 8)
      _mm256_storeu_ps(hr + c, _mm256_mul_ps(_mm256_sub_ps(_mm256_loadu_ps(xr + c), vmf), vrs));
    for (; c < cols; ++c) hr[c] = (xr[c] - static_cast<float>(mean)) * rs;
    rstd[r] = rs;
  }
}

void normalize_rows_backward(const float* xhat, const float* rstd, const float* dxhat, float* dx, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const std::ptrdiff_t o = static_cast<std::ptrdiff_t>(r) * cols;
    __m256d sg = _mm256_setzero_pd(), sgx = _mm256_setzero_pd();
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d g = _mm256_cvtps_pd(_mm_loadu_ps(dxhat + o + c));
      const __m256d h = _mm256_cvtps_pd(_mm_loadu_ps(xhat + o + c));
      sg = _mm256_add_pd(sg, g);
      sgx = _mm256_fmadd_pd(g, h, sgx);
    }
    double sum_g = hsum(sg), sum_gx = hsum(sgx);
    for (; c < cols; ++c) {
      sum_g += dxhat[o + c];
      sum_gx += static_cast<double>(dxhat[o + c]) * xhat[o + c];
    }
    const float mg = static_cast<float>(sum_g / cols);
    const float mgx = static_cast<float>(sum_gx / cols);
    const __m256 vmg = _mm256_set1_ps(mg), vmgx = _mm256_set1_ps(mgx), vr = _mm256_set1_ps(rstd[r]);
    c = 0;
    for (; c + 8 <= cols; c += 8) {
      const __m256 t = _mm256_sub_ps(_mm256_sub_ps(_mm256_loadu_ps(dxhat + o + c), vmg),
                                     _mm256_mul_ps(_mm256_loadu_ps(xhat + o + c), vmgx));
      _mm256_storeu_ps(dx + o + c, _mm256_mul_ps(vr, t));
    }
    for (; c < cols; ++c) dx[o + c] = rstd[r] * (dxhat[o + c] - mg - xhat[o + c] * mgx);
  }
}

void adam_update(float* w, float* g, float* m, float* v, std::size_t n, float lr, float beta1, float beta2, float eps,
                 float c1, float c2) {
  const __m256 vb1 = _mm256_set1_ps(beta1), vb1c = _mm256_set1_ps(1.0f - beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2), vb2c = _mm256_set1_ps(1.0f - beta2);
  const __m256 vc1 = _mm256_set1_ps(c1), vc2 = _mm256_set1_ps(c2);
  const __m256 vlr = _mm256_set1_ps(lr), veps = _mm256_set1_ps(eps), zero = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 gi = _mm256_loadu_ps(g + i);
    const __m256 mi = _mm256_add_ps(_mm256_mul_ps(vb1, _mm256_loadu_ps(m + i)), _mm256_mul_ps(vb1c, gi));
    const __m256 vi =
        _mm256_add_ps(_mm256_mul_ps(vb2, _mm256_loadu_ps(v + i)), _mm256_mul_ps(_mm256_mul_ps(vb2c, gi), gi));
    const __m256 mhat = _mm256_div_ps(mi, vc1);
    const __m256 vhat = _mm256_div_ps(vi, vc2);
    const __m256 step = _mm256_div_ps(_mm256_mul_ps(vlr, mhat), _mm256_add_ps(_mm256_sqrt_ps(vhat), veps));
    _mm256_storeu_ps(m + i, mi);
    _mm256_storeu_ps(v + i, vi);
    _mm256_storeu_ps(w + i, _mm256_sub_ps(_mm256_loadu_ps(w + i), step));
    _mm256_storeu_ps(g + i, zero);
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0f - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0f - beta2) * g[i] * g[i];
    w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    g[i] = 0.0f;
  }
}

bool all_finite(const float* x, std::size_t n) {
  const __m256 zero = _mm256_setzero_ps();
  __m256 bad = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_loadu_ps(x + i);
    // v·0 is NaN exactly for ±inf and NaN.
    bad = _mm256_or_ps(bad, _mm256_cmp_ps(_mm256_mul_ps(v, zero), zero, _CMP_NEQ_UQ));
  }
  if (_mm256_movemask_ps(bad) != 0) return false;
  for (; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace

const KernelSet* avx2_kernels() {
  static const KernelSet set{
      "avx2",        gemm,           add_row_bias,           accumulate_column_sums,
      relu_forward,  relu_backward,  axpy,                   scale_shift_rows,
      normalize_rows, normalize_rows_backward, adam_update, all_finite,
  };
  return &set;
}

}  // namespace morphoguard::simd
