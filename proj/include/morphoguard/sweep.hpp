#pragma once

// Fixed-budget comparisons across model variants and seeds, summarized in the
// Val Loss / Val Std / Rel Improvement / p-value / Sig layout.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "morphoguard/dataset.hpp"
#include "morphoguard/model_config.hpp"
#include "morphoguard/training.hpp"

namespace morphoguard::eval {

enum class SweepKind { fusion, scale };

const char* sweep_kind_name(SweepKind k);
SweepKind parse_sweep_kind(std::string_view name);

struct SweepVariant {
  std::string name;
  model::ModelConfig config;
};

/// The five compared fusion methods on one backbone preset; additive first (baseline).
std::vector<SweepVariant> fusion_variants(int input_dim, int output_dim, std::string_view preset = "ci_128");
/// Presets in increasing size; the first is the baseline.
std::vector<SweepVariant> scale_variants(int input_dim, int output_dim,
                                         const std::vector<std::string>& presets = {"ci_128", "micro_1m", "small_5m"});

struct SweepRun {
  std::string variant;
  std::uint64_t seed = 0;
  std::vector<train::MetricsRow> metrics;
  double val_loss = 0;        // final-epoch validation loss
  double val_std_epochs = 0;  // std of validation loss across epochs
  bool converged = false;     // final train loss < 0.5 × epoch-1 train loss
};

struct SweepResult {
  std::string variant;
  bool baseline = false;
  std::vector<double> seed_losses;
  double val_loss_mean = 0;
  double val_std_seeds = 0;   // across seeds
  double val_std_epochs = 0;  // mean over seeds of the across-epoch std
  double rel_improvement_pct = 0;
  std::optional<double> p_value;         // Welch over per-seed losses
  std::optional<double> p_value_epochs;  // Welch over all per-epoch losses
  bool significant = false;
  bool converged = false;  // every seed converged
};

struct SweepOutput {
  SweepKind kind = SweepKind::fusion;
  std::vector<SweepRun> runs;  // variant-major, then seed order
  std::vector<SweepResult> results;
};

/// Trains every (variant, seed) under the same budget. Runs may execute on
/// `jobs` threads; results are merged in (variant, seed) order.
SweepOutput run_sweep(SweepKind kind, const std::vector<SweepVariant>& variants, const data::Dataset& ds,
                      const train::TrainConfig& budget, const std::vector<std::uint64_t>& seeds, int jobs = 1,
                      const std::function<void(const SweepRun&)>& on_run = {});

/// Recomputes the summary rows from runs (first variant is the baseline).
std::vector<SweepResult> summarize_sweep(const std::vector<SweepRun>& runs);

std::string sweep_csv_header();
void write_sweep_csv(const std::string& path, const SweepOutput& out);
/// Per-epoch curves: variant,seed,epoch,train_total,val_total.
void write_curves_csv(const std::string& path, const SweepOutput& out);
std::string sweep_markdown(const SweepOutput& out);

struct MonotoneCheck {
  bool holds = true;
  std::string detail;
};

/// Each larger variant's mean loss ≤ the next smaller one's mean + pooled std.
MonotoneCheck scale_monotone_check(const std::vector<SweepResult>& results);

}  // namespace morphoguard::eval
