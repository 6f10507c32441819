#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace morphoguard::model {

enum class FusionMethod { additive, concat, input_concat, parallel_branch, adaptive_norm, outer_product };
enum class BackboneKind { residual, mlp };

const char* fusion_name(FusionMethod f);
FusionMethod parse_fusion(std::string_view name);
/// The five methods compared in the fusion sweep (outer_product excluded).
std::vector<FusionMethod> sweep_fusion_methods();

struct ModelConfig {
  std::string preset = "custom";
  int input_dim = 0;   // 3M
  int output_dim = 0;  // n
  std::vector<int> encoder_widths;  // last entry is the feature width
  BackboneKind backbone = BackboneKind::residual;
  int layers = 8;  // residual blocks
  int width = 512;
  std::vector<int> mlp_widths;  // hidden widths of the plain MLP backbone
  FusionMethod fusion = FusionMethod::additive;
  int outer_rank = 32;
  double noise_sigma = 0.005;  // meters
  double lambda_m = 1.0;
  double lambda_g = 0.1;
  std::uint64_t seed = 0;

  int feature_width() const { return encoder_widths.empty() ? 0 : encoder_widths.back(); }
  /// Width of the representation entering the output heads.
  int trunk_width() const;
  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Named architectures. Dims come from the dataset (3M inputs, n outputs).
ModelConfig preset_config(std::string_view name, int input_dim, int output_dim);
std::vector<std::string> preset_names();

std::string to_text(const ModelConfig& cfg);
ModelConfig parse_model_config(std::string_view text, std::string_view source = "<config>");
ModelConfig load_model_config(const std::string& path);

/// Trainable parameter count from layer shapes alone.
std::size_t count_params(const ModelConfig& cfg);

}  // namespace morphoguard::model
