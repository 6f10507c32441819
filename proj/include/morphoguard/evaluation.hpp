#pragma once

// Contact-point and joint error of a predictor on dataset records, and the
// closed-loop morphology tracking benchmark.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "morphoguard/dataset.hpp"
#include "morphoguard/model.hpp"
#include "morphoguard/morphology.hpp"

namespace morphoguard::eval {

using nn::Tensor;

struct ErrorSummary {
  double min = 0, median = 0, mean = 0, max = 0, p95 = 0;
  std::size_t count = 0;
};

ErrorSummary summarize(std::span<const double> values);

/// Maps a batch of (m0, dm) rows to dq rows. `records` are the dataset indices
/// of the batch rows, which label-based predictors use.
using Predictor =
    std::function<Tensor(const Tensor& m0, const Tensor& dm, std::span<const std::size_t> records)>;

Predictor net_predictor(model::MorphoGuardNet& net);
Predictor oracle_predictor(const data::Dataset& ds);
Predictor zero_predictor(int dof);

struct JointError {
  double rmse_rad = 0;
  double rmse_deg = 0;
  double max_abs_rad = 0;
};

struct EvalReport {
  JointError joint;
  ErrorSummary contact;  // over every (record, material point)
  std::size_t samples = 0;
  std::vector<std::size_t> records;
  std::vector<double> sample_mean_error;  // per record, mean over its points
  std::vector<double> sample_max_error;
};

/// Replays every record from its stored start configuration:
/// q = clamp(q0 + dq_pred); error of point p = ‖FK_p(q) − FK_p(q0) − dm_p‖.
EvalReport contact_point_error(const Predictor& predictor, const kin::KinematicChain& chain,
                               const morph::SkinLayout& layout, const data::Dataset& ds, const data::Sidecar& sidecar,
                               std::span<const std::size_t> records, int batch = 512);

JointError joint_error(const Predictor& predictor, const data::Dataset& ds, std::span<const std::size_t> records,
                       int batch = 512);

void write_eval_csv(const std::string& path, const EvalReport& report);
std::string format_eval_summary(const EvalReport& report);

struct TrackingContext {
  int step = 0;
  const kin::JointConfig& q_current;
  const kin::JointConfig& q_reference;
};

/// Returns dq given the achieved morphology (flattened) and the delta to the
/// next reference morphology.
using TrackingPredictor = std::function<kin::JointConfig(std::span<const float> m0, std::span<const float> dm,
                                                         const TrackingContext& ctx)>;

TrackingPredictor net_tracking_predictor(model::MorphoGuardNet& net);
/// dq = q_reference − q_current.
TrackingPredictor oracle_tracking_predictor();

struct TrackingStep {
  int step = 0;
  ErrorSummary error;  // per material point at this step
  kin::JointConfig q;
};

struct TrackingResult {
  std::vector<TrackingStep> steps;  // steps 1 .. steps−1
  double max_step_error = 0;        // max over steps of the per-step mean point error
  double max_point_error = 0;       // max over steps and points
  double median_step_error = 0;
  double final_step_error = 0;
  /// final ≤ 3 × median (plus 1e-9 m slack for exact tracking).
  bool non_exploding = true;
};

TrackingResult tracking_benchmark(const TrackingPredictor& predictor, const kin::KinematicChain& chain,
                                  const morph::SkinLayout& layout, const kin::JointConfig& q_start,
                                  const kin::JointConfig& q_goal, int steps);

void write_tracking_csv(const std::string& path, const TrackingResult& result);

}  // namespace morphoguard::eval
