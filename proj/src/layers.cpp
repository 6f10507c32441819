#include "morphoguard/layers.hpp"

#include <algorithm>
#include <cmath>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::nn {

void LayerSpec::validate() const {
  if (in <= 0 || out <= 0) throw ConfigError("layer dimensions must be positive");
  if (kind == LayerKind::residual_block && in != out) throw ConfigError("residual block must be square");
  if ((kind == LayerKind::relu || kind == LayerKind::layer_norm) && in != out)
    throw ConfigError("elementwise layer must preserve width");
}

void init_kaiming_uniform(Tensor& w, Rng& rng, double gain) {
  const double bound = gain * std::sqrt(3.0 / std::max(1, w.rows));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : w.data) x = static_cast<real>(dist(rng));
}

Affine Affine::create(ParameterStore& store, const std::string& prefix, int in, int out) {
  LayerSpec{LayerKind::affine, in, out}.validate();
  Affine a;
  a.w = &store.add(prefix + ".w", in, out);
  a.b = &store.add(prefix + ".b", 1, out);
  return a;
}

void Affine::forward(const Tensor& x, Tensor& y) const {
  if (x.cols != in()) require_shape(x, x.rows, in(), w->name + " input");
  matmul(x, w->value, y);
  simd::active().add_row_bias(y.data.data(), b->value.data.data(), y.rows, y.cols);
  require_finite(y, w->name + " output");
}

void Affine::backward(const Tensor& x, const Tensor& dy, Tensor* dx) const {
  require_shape(dy, x.rows, out(), w->name + " upstream gradient");
  matmul_tn_acc(x, dy, w->grad);
  simd::active().accumulate_column_sums(dy.data.data(), dy.rows, dy.cols, b->grad.data.data());
  if (dx != nullptr) matmul_nt(dy, w->value, *dx);
}

void relu_forward(const Tensor& x, Tensor& y) {
  y.resize(x.rows, x.cols);
  simd::active().relu_forward(x.data.data(), y.data.data(), x.size());
}

void relu_backward(const Tensor& x, const Tensor& dy, Tensor& dx) {
  if (!x.same_shape(dy)) throw ConfigError("relu_backward: shape mismatch");
  dx.resize(x.rows, x.cols);
  simd::active().relu_backward(x.data.data(), dy.data.data(), dx.data.data(), x.size());
}

LayerNorm LayerNorm::create(ParameterStore& store, const std::string& prefix, int width, bool affine) {
  LayerNorm ln;
  if (affine) {
    ln.gamma = &store.add(prefix + ".gamma", 1, width);
    ln.beta = &store.add(prefix + ".beta", 1, width);
    ln.gamma->value.fill(1.0f);
  }
  return ln;
}

void LayerNorm::forward(const Tensor& x, Tensor& y, Cache& cache) const {
  const auto& k = simd::active();
  cache.xhat.resize(x.rows, x.cols);
  cache.rstd.resize(x.rows);
  k.normalize_rows(x.data.data(), cache.xhat.data.data(), cache.rstd.data(), x.rows, x.cols, eps);
  y.resize(x.rows, x.cols);
  if (gamma == nullptr) {
    y.data = cache.xhat.data;
    return;
  }
  require_shape(x, x.rows, gamma->value.cols, gamma->name + " input");
  k.scale_shift_rows(cache.xhat.data.data(), gamma->value.data.data(), beta->value.data.data(), y.data.data(), x.rows,
                     x.cols);
}

void LayerNorm::backward(const Cache& cache, const Tensor& dy, Tensor& dx) const {
  const int rows = dy.rows;
  const int cols = dy.cols;
  const Tensor* dxhat = &dy;
  Tensor scaled;
  if (gamma != nullptr) {
    scaled.resize(rows, cols);
    real* dg = gamma->grad.data.data();
    const real* g = gamma->value.data.data();
    for (int r = 0; r < rows; ++r) {
      const real* dyr = dy.row(r);
      const real* xr = cache.xhat.row(r);
      real* sr = scaled.row(r);
      for (int c = 0; c < cols; ++c) {
        dg[c] += dyr[c] * xr[c];
        sr[c] = dyr[c] * g[c];
      }
    }
    simd::active().accumulate_column_sums(dy.data.data(), rows, cols, beta->grad.data.data());
    dxhat = &scaled;
  }
  dx.resize(rows, cols);
  simd::active().normalize_rows_backward(cache.xhat.data.data(), cache.rstd.data(), dxhat->data.data(),
                                         dx.data.data(), rows, cols);
}

ResidualBlock ResidualBlock::create(ParameterStore& store, const std::string& prefix, int width,
                                    Modulation modulation, Rng& rng, bool identity_init) {
  LayerSpec{LayerKind::residual_block, width, width}.validate();
  ResidualBlock blk;
  blk.modulation = modulation;
  blk.fc1 = Affine::create(store, prefix + ".fc1", width, width);
  blk.norm = LayerNorm::create(store, prefix + ".ln", width, modulation != Modulation::adaptive);
  blk.fc2 = Affine::create(store, prefix + ".fc2", width, width);
  init_kaiming_uniform(blk.fc1.w->value, rng, std::sqrt(2.0));
  if (!identity_init) init_kaiming_uniform(blk.fc2.w->value, rng, 1.0);
  return blk;
}

void ResidualBlock::forward(const Tensor& x, Tensor& y, Cache& cache, const Tensor* mod) const {
  const int w = width();
  fc1.forward(x, cache.h1);
  norm.forward(cache.h1, cache.n, cache.ln);
  if (modulation == Modulation::none) {
    cache.u = cache.n;
  } else {
    if (mod == nullptr) throw ConfigError("modulated residual block needs a conditioning tensor");
    require_shape(*mod, x.rows, 2 * w, "block conditioning");
    cache.u.resize(x.rows, w);
    for (int r = 0; r < x.rows; ++r) {
      const real* nr = cache.n.row(r);
      const real* g = mod->row(r);
      const real* b = g + w;
      real* ur = cache.u.row(r);
      for (int c = 0; c < w; ++c) ur[c] = (1.0f + g[c]) * nr[c] + b[c];
    }
  }
  relu_forward(cache.u, cache.r);
  fc2.forward(cache.r, cache.h2);
  y.resize(x.rows, w);
  for (std::size_t i = 0; i < y.size(); ++i) y.data[i] = x.data[i] + cache.h2.data[i];
}

void ResidualBlock::backward(const Tensor& x, const Cache& cache, const Tensor& dy, Tensor& dx, const Tensor* mod,
                             Tensor* dmod) const {
  const int w = width();
  Tensor dr;
  fc2.backward(cache.r, dy, &dr);
  Tensor du;
  relu_backward(cache.u, dr, du);
  Tensor dn;
  if (modulation == Modulation::none) {
    dn = std::move(du);
  } else {
    if (mod == nullptr || dmod == nullptr) throw ConfigError("modulated residual block needs its conditioning");
    require_shape(*dmod, du.rows, 2 * w, "block conditioning gradient");
    dn.resize(du.rows, w);
    for (int r = 0; r < du.rows; ++r) {
      const real* dur = du.row(r);
      const real* nr = cache.n.row(r);
      const real* g = mod->row(r);
      real* dg = dmod->row(r);
      real* db = dg + w;
      real* dnr = dn.row(r);
      for (int c = 0; c < w; ++c) {
        dg[c] += dur[c] * nr[c];
        db[c] += dur[c];
        dnr[c] = dur[c] * (1.0f + g[c]);
      }
    }
  }
  Tensor dh1;
  norm.backward(cache.ln, dn, dh1);
  fc1.backward(x, dh1, &dx);
  for (std::size_t i = 0; i < dx.size(); ++i) dx.data[i] += dy.data[i];
}

}  // namespace morphoguard::nn
