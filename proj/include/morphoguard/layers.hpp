#pragma once

// Layers with explicit forward and backward passes. Backward calls accumulate
// into Parameter::grad and write the input gradient when requested.

#include <string>

#include "morphoguard/tensor.hpp"

namespace morphoguard::nn {

enum class LayerKind { affine, relu, layer_norm, residual_block };

struct LayerSpec {
  LayerKind kind = LayerKind::affine;
  int in = 0;
  int out = 0;

  /// Throws ConfigError for non-positive dims or a non-square residual block.
  void validate() const;
};

/// Uniform(−b, b) with b = gain·√(3 / fan_in); gain √2 gives the ReLU variant.
void init_kaiming_uniform(Tensor& w, Rng& rng, double gain);

/// y = x·W + b with W stored in×out and b 1×out.
struct Affine {
  Parameter* w = nullptr;
  Parameter* b = nullptr;

  /// Zero-initialized; see init_kaiming_uniform.
  static Affine create(ParameterStore& store, const std::string& prefix, int in, int out);

  int in() const { return w->value.rows; }
  int out() const { return w->value.cols; }

  void forward(const Tensor& x, Tensor& y) const;
  /// dx may be null when the input gradient is not needed.
  void backward(const Tensor& x, const Tensor& dy, Tensor* dx) const;
};

void relu_forward(const Tensor& x, Tensor& y);
void relu_backward(const Tensor& x, const Tensor& dy, Tensor& dx);

/// Per-row normalization over the feature axis, then an optional learned
/// scale/shift (absent when gamma is null).
struct LayerNorm {
  Parameter* gamma = nullptr;
  Parameter* beta = nullptr;
  real eps = 1e-5f;

  struct Cache {
    Tensor xhat;
    std::vector<real> rstd;
  };

  static LayerNorm create(ParameterStore& store, const std::string& prefix, int width, bool affine = true);

  void forward(const Tensor& x, Tensor& y, Cache& cache) const;
  void backward(const Cache& cache, const Tensor& dy, Tensor& dx) const;
};

/// How an external (batch × 2W) conditioning tensor [Δγ | β] enters a block.
enum class Modulation {
  none,      // relu(LN(h))
  film,      // relu((1+Δγ) ⊙ LN(h) + β)
  adaptive,  // relu((1+Δγ) ⊙ normalize(h) + β), no learned LN scale/shift
};

/// y = x + fc2(relu(mod(LN(fc1(x))))).
struct ResidualBlock {
  Affine fc1;
  Affine fc2;
  LayerNorm norm;
  Modulation modulation = Modulation::none;

  struct Cache {
    Tensor h1;
    LayerNorm::Cache ln;
    Tensor n;  // LN output before modulation
    Tensor u;  // pre-activation
    Tensor r;  // activation
    Tensor h2;
  };

  /// fc1 gets Kaiming init; fc2 is zero when `identity_init`, making the block an exact identity.
  static ResidualBlock create(ParameterStore& store, const std::string& prefix, int width, Modulation modulation,
                              Rng& rng, bool identity_init = true);

  int width() const { return fc1.in(); }

  void forward(const Tensor& x, Tensor& y, Cache& cache, const Tensor* mod = nullptr) const;
  /// Writes dx; adds the conditioning gradient into dmod when modulated.
  void backward(const Tensor& x, const Cache& cache, const Tensor& dy, Tensor& dx, const Tensor* mod = nullptr,
                Tensor* dmod = nullptr) const;
};

}  // namespace morphoguard::nn
