#pragma once

// Encoder / fusion / residual-backbone network mapping a morphology pair
// (m0, dm) to a joint command dq, with an auxiliary head predicting the
// observation noise injected on both inputs.

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "morphoguard/layers.hpp"
#include "morphoguard/model_config.hpp"

namespace morphoguard::model {

using nn::Tensor;

enum class NoiseMode { train, eval };

struct ForwardOutput {
  Tensor dq;        // batch × n, radians
  Tensor eps_pred;  // batch × 6M, meters
  Tensor eps_true;  // batch × 6M, zero in eval mode
};

/// Fixed input/output scaling, estimated on the training split and stored with
/// the weights. Identity by default.
struct Normalization {
  std::vector<float> m0_mean;
  std::vector<float> m0_scale;
  std::vector<float> dm_scale;
  std::vector<float> dq_scale;
};

class MorphoGuardNet {
 public:
  explicit MorphoGuardNet(ModelConfig config);
  MorphoGuardNet(const MorphoGuardNet&) = delete;
  MorphoGuardNet& operator=(const MorphoGuardNet&) = delete;

  /// Independent copy with identical parameter values and optimizer state.
  std::unique_ptr<MorphoGuardNet> clone() const;

  const ModelConfig& config() const { return config_; }
  /// Training-time overrides recorded into the config.
  void set_noise_sigma(double sigma) { config_.noise_sigma = sigma; }
  void set_loss_weights(double lambda_m, double lambda_g);

  void set_normalization(const Normalization& n);
  Normalization normalization() const;

  /// Applies normalization and both encoders. For input_concat the shared
  /// encoder output is returned as z0 and zg is empty.
  std::pair<Tensor, Tensor> encode(const Tensor& m0, const Tensor& dm);
  /// Combines encoder features; modulation tensors for the backbone are kept
  /// internally for the following backbone pass.
  Tensor fuse(const Tensor& z0, const Tensor& zg);

  /// Train mode with sigma > 0 draws ε ~ N(0, σ²) per input coordinate from rng.
  ForwardOutput forward(const Tensor& m0, const Tensor& dm, NoiseMode mode, Rng* rng = nullptr);
  /// Eval-mode dq only.
  Tensor predict(const Tensor& m0, const Tensor& dm);

  /// Backpropagates from the most recent forward. d_eps may be null.
  void backward(const Tensor& d_dq, const Tensor* d_eps);

  std::vector<nn::Parameter*> parameters() { return store_.trainable(); }
  /// Trainable parameters followed by normalization buffers, in a fixed order.
  std::vector<nn::Parameter*> tensors() { return store_.all(); }
  std::vector<const nn::Parameter*> tensors() const { return store_.all(); }
  std::size_t parameter_count() const { return store_.trainable_count(); }
  void zero_grad();

 private:
  struct Stack {
    std::vector<nn::Affine> layers;
    struct Cache {
      std::vector<Tensor> in;
      std::vector<Tensor> pre;
      Tensor out;
    };
    void forward(const Tensor& x, Cache& c) const;
    void backward(const Cache& c, const Tensor& dout, Tensor* dx) const;
  };

  Stack make_stack(const std::string& prefix, int in, const std::vector<int>& widths, Rng& rng);
  void normalize_inputs(const Tensor& m0, const Tensor& dm);
  void run_backbone(const Tensor& fused);

  ModelConfig config_;
  nn::ParameterStore store_;

  Stack enc0_, encg_;  // enc0_ is the shared encoder for input_concat
  nn::Affine cat_proj_;
  nn::Affine outer0_, outerg_, outer_proj_;
  std::vector<nn::Affine> film_;
  nn::Affine ada_;
  std::vector<nn::ResidualBlock> blocks_;
  Stack mlp_;
  nn::Affine cmd_head_, noise_head_;
  nn::Parameter *m0_mean_ = nullptr, *m0_scale_ = nullptr, *dm_scale_ = nullptr, *dq_scale_ = nullptr,
                *eps_scale_ = nullptr;

  // Activations of the most recent forward pass.
  Tensor a_, g_, cat_in_;
  Stack::Cache enc0_cache_, encg_cache_;
  Tensor fusion_in_, p0_, pg_, outer_;
  std::vector<Tensor> mods_;
  std::vector<Tensor> block_in_;
  std::vector<nn::ResidualBlock::Cache> block_cache_;
  Stack::Cache mlp_cache_;
  Tensor trunk_;
};

}  // namespace morphoguard::model
