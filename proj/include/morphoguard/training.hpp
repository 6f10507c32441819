#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "morphoguard/dataset.hpp"
#include "morphoguard/model.hpp"

namespace morphoguard::train {

using model::MorphoGuardNet;
using nn::Tensor;

struct TrainConfig {
  int batch = 64;
  double lr = 1e-3;
  double lr_min = 1e-5;  // cosine decay floor
  int epochs = 10;
  double lambda_m = 1.0;
  double lambda_g = 0.1;
  double sigma = 0.005;  // training noise, meters
  std::uint64_t seed = 0;
  bool shuffle = true;
  int val_every = 1;  // epochs between validations; the last epoch always validates
  bool record_time = true;  // false writes 0 seconds so reruns are byte-identical
  std::size_t max_train_samples = 0;  // 0 uses the whole train split
  int eval_batch = 512;

  void validate() const;
  std::string describe() const;
};

struct MetricsRow {
  int epoch = 0;
  double train_total = 0, train_lm = 0, train_lg = 0;
  double val_total = 0, val_lm = 0, val_lg = 0;
  double val_joint_rmse_rad = 0;
  double seconds = 0;
};

struct LossParts {
  double total = 0, lm = 0, lg = 0;
};

/// Mean over rows of ‖pred − truth‖². When grad is set it receives
/// weight · ∂L/∂pred.
double loss_motion(const Tensor& pred, const Tensor& truth, Tensor* grad = nullptr, double weight = 1.0);
/// lambda · mean over rows of ‖eps_pred − eps_true‖²; same gradient convention.
double loss_noise(const Tensor& eps_pred, const Tensor& eps_true, double lambda, Tensor* grad = nullptr,
                  double weight = 1.0);
inline double loss_total(double lm, double lg, double lambda_m, double lambda_g) { return lambda_m * lm + lambda_g * lg; }

/// Throws ConfigError when the network's input/output dims disagree with the dataset.
void check_compatible(const model::ModelConfig& cfg, const data::DatasetHeader& header);

/// Per-feature statistics over `rows`: m0 mean/std (floor 1e-3 m), dm RMS
/// (floor 1e-4 m) and dq RMS (floor 1e-4 rad). Input scales include the
/// training noise variance sigma².
model::Normalization compute_normalization(const data::Dataset& ds, std::span<const std::size_t> rows,
                                           double sigma = 0.0);

void gather_batch(const data::Dataset& ds, std::span<const std::size_t> rows, Tensor& m0, Tensor& dm, Tensor* dq);

/// Eval-mode losses over `rows` (sample-weighted across batches).
LossParts evaluate_loss(MorphoGuardNet& net, const data::Dataset& ds, std::span<const std::size_t> rows,
                        double lambda_m, double lambda_g, int batch = 512);

struct TrainResult {
  std::vector<MetricsRow> metrics;
  int best_epoch = 0;
  double best_val_total = 0;
};

/// Fits the network on the train split, validating on the val split. With a
/// non-empty out_dir writes metrics.csv, best.mgc and last.mgc there.
TrainResult train(MorphoGuardNet& net, const data::Dataset& ds, const TrainConfig& cfg, const std::string& out_dir,
                  const std::function<void(const MetricsRow&)>& on_epoch = {});

std::string metrics_header();
std::string format_metrics_row(const MetricsRow& row);
void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

}  // namespace morphoguard::train
