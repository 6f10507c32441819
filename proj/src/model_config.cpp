#include "morphoguard/model_config.hpp"

#include <sstream>

#include "morphoguard/common.hpp"
#include "morphoguard/kvtext.hpp"

namespace morphoguard::model {

namespace {

struct FusionEntry {
  FusionMethod method;
  const char* name;
};

constexpr FusionEntry kFusions[] = {
    {FusionMethod::additive, "additive"},
    {FusionMethod::concat, "concat"},
    {FusionMethod::input_concat, "input_concat"},
    {FusionMethod::parallel_branch, "parallel_branch"},
    {FusionMethod::adaptive_norm, "adaptive_norm"},
    {FusionMethod::outer_product, "outer_product"},
};

struct PresetShape {
  const char* name;
  int layers;
  int width;
};

constexpr PresetShape kResidualPresets[] = {
    {"ci_128", 8, 128},        {"micro_1m", 8, 256},       {"small_5m", 8, 512},
    {"medium_10m", 8, 768},    {"medium_25m", 10, 1024},   {"large_50m", 22, 1024},
    {"large_100m", 22, 1536},  {"xlarge_200m", 24, 2048},
};

std::size_t affine_params(int in, int out) {
  return static_cast<std::size_t>(in) * static_cast<std::size_t>(out) + static_cast<std::size_t>(out);
}

std::size_t chain_params(int in, const std::vector<int>& widths) {
  std::size_t n = 0;
  for (int w : widths) {
    n += affine_params(in, w);
    in = w;
  }
  return n;
}

std::vector<double> to_doubles(const std::vector<int>& v) { return {v.begin(), v.end()}; }

std::vector<int> to_widths(const kv::Table& t, std::string_view key) {
  std::vector<int> out;
  for (double d : t.array(key)) {
    if (d != static_cast<int>(d) || d < 1) t.fail(key, "widths must be positive integers");
    out.push_back(static_cast<int>(d));
  }
  return out;
}

}  // namespace

const char* fusion_name(FusionMethod f) {
  for (const auto& e : kFusions)
    if (e.method == f) return e.name;
  return "?";
}

FusionMethod parse_fusion(std::string_view name) {
  for (const auto& e : kFusions)
    if (name == e.name) return e.method;
  throw ConfigError("unknown fusion method '" + std::string(name) + "'");
}

std::vector<FusionMethod> sweep_fusion_methods() {
  return {FusionMethod::additive, FusionMethod::concat, FusionMethod::input_concat, FusionMethod::parallel_branch,
          FusionMethod::adaptive_norm};
}

int ModelConfig::trunk_width() const {
  if (backbone == BackboneKind::mlp) return mlp_widths.empty() ? feature_width() : mlp_widths.back();
  return width;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("model config: " + m); };
  if (input_dim < 3 || input_dim % 3 != 0) fail("input_dim must be a positive multiple of 3");
  if (output_dim < 1) fail("output_dim must be positive");
  if (encoder_widths.empty()) fail("encoder_widths must not be empty");
  for (int w : encoder_widths)
    if (w < 1) fail("encoder widths must be positive");
  if (backbone == BackboneKind::residual) {
    if (layers < 1) fail("layers must be >= 1");
    if (width < 8) fail("width must be >= 8");
    if (feature_width() != width) fail("last encoder width must equal the backbone width");
  } else {
    for (int w : mlp_widths)
      if (w < 1) fail("mlp widths must be positive");
    if (fusion == FusionMethod::parallel_branch || fusion == FusionMethod::adaptive_norm)
      fail(std::string(fusion_name(fusion)) + " fusion needs the residual backbone");
  }
  if (fusion == FusionMethod::outer_product && outer_rank < 1) fail("outer_rank must be positive");
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be >= 0");
  if (!(lambda_m >= 0.0) || !(lambda_g >= 0.0)) fail("loss weights must be >= 0");
}

ModelConfig preset_config(std::string_view name, int input_dim, int output_dim) {
  ModelConfig cfg;
  cfg.preset = std::string(name);
  cfg.input_dim = input_dim;
  cfg.output_dim = output_dim;
  if (name == "baseline_mlp") {
    cfg.backbone = BackboneKind::mlp;
    cfg.fusion = FusionMethod::input_concat;
    cfg.encoder_widths = {512, 512};
    cfg.mlp_widths = {256, 128};
    cfg.layers = 0;
    cfg.width = 0;
    return cfg;
  }
  for (const auto& p : kResidualPresets) {
    if (name == p.name) {
      cfg.layers = p.layers;
      cfg.width = p.width;
      cfg.encoder_widths = {p.width, p.width};
      return cfg;
    }
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out{"baseline_mlp"};
  for (const auto& p : kResidualPresets) out.emplace_back(p.name);
  return out;
}

std::string to_text(const ModelConfig& cfg) {
  std::ostringstream os;
  os << "preset = \"" << cfg.preset << "\"\n";
  os << "input_dim = " << cfg.input_dim << "\n";
  os << "output_dim = " << cfg.output_dim << "\n";
  os << "encoder_widths = " << kv::format_array(to_doubles(cfg.encoder_widths)) << "\n";
  os << "backbone = \"" << (cfg.backbone == BackboneKind::residual ? "residual" : "mlp") << "\"\n";
  os << "layers = " << cfg.layers << "\n";
  os << "width = " << cfg.width << "\n";
  os << "mlp_widths = " << kv::format_array(to_doubles(cfg.mlp_widths)) << "\n";
  os << "fusion = \"" << fusion_name(cfg.fusion) << "\"\n";
  os << "outer_rank = " << cfg.outer_rank << "\n";
  os << "noise_sigma = " << kv::format_number(cfg.noise_sigma) << "\n";
  os << "lambda_m = " << kv::format_number(cfg.lambda_m) << "\n";
  os << "lambda_g = " << kv::format_number(cfg.lambda_g) << "\n";
  os << "seed = " << cfg.seed << "\n";
  return os.str();
}

ModelConfig parse_model_config(std::string_view text, std::string_view source) {
  const auto doc = kv::parse(text, source);
  if (!doc.sections.empty()) doc.sections.front().fail("", "model config has no sections");
  const auto& t = doc.root;
  ModelConfig cfg;
  cfg.preset = t.text_or("preset", "custom");
  cfg.input_dim = static_cast<int>(t.integer("input_dim"));
  cfg.output_dim = static_cast<int>(t.integer("output_dim"));
  cfg.encoder_widths = to_widths(t, "encoder_widths");
  const auto backbone = t.text_or("backbone", "residual");
  if (backbone == "residual") cfg.backbone = BackboneKind::residual;
  else if (backbone == "mlp") cfg.backbone = BackboneKind::mlp;
  else t.fail("backbone", "expected \"residual\" or \"mlp\"");
  cfg.layers = static_cast<int>(t.number_or("layers", 0));
  cfg.width = static_cast<int>(t.number_or("width", 0));
  if (t.has("mlp_widths")) cfg.mlp_widths = to_widths(t, "mlp_widths");
  try {
    cfg.fusion = parse_fusion(t.text_or("fusion", "additive"));
  } catch (const ConfigError& e) {
    t.fail("fusion", e.what());
  }
  cfg.outer_rank = static_cast<int>(t.number_or("outer_rank", 32));
  cfg.noise_sigma = t.number_or("noise_sigma", cfg.noise_sigma);
  cfg.lambda_m = t.number_or("lambda_m", cfg.lambda_m);
  cfg.lambda_g = t.number_or("lambda_g", cfg.lambda_g);
  const double seed = t.number_or("seed", 0);
  if (seed < 0 || seed != static_cast<double>(static_cast<std::uint64_t>(seed))) t.fail("seed", "must be a non-negative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.validate();
  return cfg;
}

ModelConfig load_model_config(const std::string& path) { return parse_model_config(kv::read_text_file(path), path); }

std::size_t count_params(const ModelConfig& cfg) {
  cfg.validate();
  const int in = cfg.input_dim;
  const int f = cfg.feature_width();
  std::size_t n = 0;
  if (cfg.fusion == FusionMethod::input_concat) n += chain_params(2 * in, cfg.encoder_widths);
  else n += 2 * chain_params(in, cfg.encoder_widths);

  switch (cfg.fusion) {
    case FusionMethod::concat: n += affine_params(2 * f, f); break;
    case FusionMethod::outer_product:
      n += 2 * affine_params(f, cfg.outer_rank) + affine_params(cfg.outer_rank * cfg.outer_rank, f);
      break;
    case FusionMethod::parallel_branch: n += static_cast<std::size_t>(cfg.layers) * affine_params(f, 2 * cfg.width); break;
    case FusionMethod::adaptive_norm: n += affine_params(f, 2 * cfg.width); break;
    default: break;
  }

  if (cfg.backbone == BackboneKind::residual) {
    const std::size_t norm = cfg.fusion == FusionMethod::adaptive_norm ? 0 : 2 * static_cast<std::size_t>(cfg.width);
    n += static_cast<std::size_t>(cfg.layers) * (2 * affine_params(cfg.width, cfg.width) + norm);
  } else {
    n += chain_params(f, cfg.mlp_widths);
  }
  n += affine_params(cfg.trunk_width(), cfg.output_dim);
  n += affine_params(cfg.trunk_width(), 2 * in);
  return n;
}

}  // namespace morphoguard::model
