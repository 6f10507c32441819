#include "morphoguard/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "morphoguard/stats.hpp"
#include "morphoguard/training.hpp"

namespace morphoguard::eval {

ErrorSummary summarize(std::span<const double> values) {
  ErrorSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::vector<double> v(values.begin(), values.end());
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  s.mean = stats::mean(v);
  s.median = stats::quantile(v, 0.5);
  s.p95 = stats::quantile(v, 0.95);
  return s;
}

Predictor net_predictor(model::MorphoGuardNet& net) {
  return [&net](const Tensor& m0, const Tensor& dm, std::span<const std::size_t>) { return net.predict(m0, dm); };
}

Predictor oracle_predictor(const data::Dataset& ds) {
  return [&ds](const Tensor& m0, const Tensor&, std::span<const std::size_t> records) {
    const int n = static_cast<int>(ds.dof());
    Tensor out(m0.rows, n);
    for (int i = 0; i < m0.rows; ++i) std::copy_n(ds.dq_row(records[static_cast<std::size_t>(i)]).data(), n, out.row(i));
    return out;
  };
}

Predictor zero_predictor(int dof) {
  return [dof](const Tensor& m0, const Tensor&, std::span<const std::size_t>) { return Tensor(m0.rows, dof); };
}

namespace {

// Runs the predictor batch by batch and hands each row of predictions to `visit`.
template <typename Visit>
void for_each_prediction(const Predictor& predictor, const data::Dataset& ds, std::span<const std::size_t> records,
                         int batch, Visit&& visit) {
  Tensor m0, dm;
  const int n = static_cast<int>(ds.dof());
  for (std::size_t start = 0; start < records.size(); start += static_cast<std::size_t>(batch)) {
    const auto chunk =
        records.subspan(start, std::min<std::size_t>(static_cast<std::size_t>(batch), records.size() - start));
    train::gather_batch(ds, chunk, m0, dm, nullptr);
    const Tensor pred = predictor(m0, dm, chunk);
    nn::require_shape(pred, static_cast<int>(chunk.size()), n, "predictor output");
    nn::require_finite(pred, "predictor output");
    for (std::size_t i = 0; i < chunk.size(); ++i) visit(chunk[i], pred.row(static_cast<int>(i)));
  }
}

}  // namespace

JointError joint_error(const Predictor& predictor, const data::Dataset& ds, std::span<const std::size_t> records,
                       int batch) {
  JointError e;
  if (records.empty()) return e;
  const std::size_t n = ds.dof();
  double sq = 0.0;
  for_each_prediction(predictor, ds, records, batch, [&](std::size_t r, const real* dq) {
    const auto truth = ds.dq_row(r);
    for (std::size_t j = 0; j < n; ++j) {
      const double d = static_cast<double>(dq[j]) - truth[j];
      sq += d * d;
      e.max_abs_rad = std::max(e.max_abs_rad, std::abs(d));
    }
  });
  e.rmse_rad = std::sqrt(sq / static_cast<double>(records.size() * n));
  e.rmse_deg = rad_to_deg(e.rmse_rad);
  return e;
}

EvalReport contact_point_error(const Predictor& predictor, const kin::KinematicChain& chain,
                               const morph::SkinLayout& layout, const data::Dataset& ds, const data::Sidecar& sidecar,
                               std::span<const std::size_t> records, int batch) {
  if (sidecar.size() != ds.size())
    throw ConfigError("sidecar has " + std::to_string(sidecar.size()) + " records, dataset " +
                      std::to_string(ds.size()));
  if (sidecar.dof != ds.dof() || static_cast<std::size_t>(chain.dof()) != ds.dof())
    throw ConfigError("dof mismatch between chain, dataset and sidecar");
  if (static_cast<std::size_t>(layout.count()) * 3 != ds.feature_dim())
    throw ConfigError("layout has " + std::to_string(layout.count()) + " points, dataset 3M=" +
                      std::to_string(ds.feature_dim()));

  EvalReport report;
  report.samples = records.size();
  const int n = chain.dof();
  const int points = layout.count();
  std::vector<double> all_errors;
  all_errors.reserve(records.size() * static_cast<std::size_t>(points));
  double joint_sq = 0.0;

  for_each_prediction(predictor, ds, records, batch, [&](std::size_t r, const real* dq) {
    const auto q0_row = sidecar.q0_row(r);
    const kin::JointConfig q0 = Eigen::Map<const Eigen::VectorXd>(q0_row.data(), n);
    kin::JointConfig q = q0;
    const auto truth = ds.dq_row(r);
    for (int j = 0; j < n; ++j) {
      q[j] += dq[j];
      const double d = static_cast<double>(dq[j]) - truth[static_cast<std::size_t>(j)];
      joint_sq += d * d;
      report.joint.max_abs_rad = std::max(report.joint.max_abs_rad, std::abs(d));
    }
    q = chain.clamp(q);
    const auto start = morph::compute_morphology(chain, layout, q0).positions;
    const auto achieved = morph::compute_morphology(chain, layout, q).positions;
    const auto dm = ds.dm_row(r);
    double sum = 0.0, worst = 0.0;
    for (int p = 0; p < points; ++p) {
      double sq = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double e = (achieved(p, c) - start(p, c)) - static_cast<double>(dm[static_cast<std::size_t>(3 * p + c)]);
        sq += e * e;
      }
      const double err = std::sqrt(sq);
      all_errors.push_back(err);
      sum += err;
      worst = std::max(worst, err);
    }
    report.records.push_back(r);
    report.sample_mean_error.push_back(sum / points);
    report.sample_max_error.push_back(worst);
  });

  report.contact = summarize(all_errors);
  if (!records.empty()) {
    report.joint.rmse_rad = std::sqrt(joint_sq / static_cast<double>(records.size() * static_cast<std::size_t>(n)));
    report.joint.rmse_deg = rad_to_deg(report.joint.rmse_rad);
  }
  return report;
}

void write_eval_csv(const std::string& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << "record,mean_point_error_m,max_point_error_m\n";
  char buf[128];
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", report.records[i], report.sample_mean_error[i],
                  report.sample_max_error[i]);
    out << buf;
  }
  if (!out) throw RuntimeFailure("write failed: " + path);
}

std::string format_eval_summary(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "samples %zu\njoint_rmse %.6g rad (%.4g deg), max |err| %.6g rad\n"
                "contact_error_m min %.6g median %.6g mean %.6g p95 %.6g max %.6g over %zu points\n",
                r.samples, r.joint.rmse_rad, r.joint.rmse_deg, r.joint.max_abs_rad, r.contact.min, r.contact.median,
                r.contact.mean, r.contact.p95, r.contact.max, r.contact.count);
  return buf;
}

TrackingPredictor net_tracking_predictor(model::MorphoGuardNet& net) {
  return [&net](std::span<const float> m0, std::span<const float> dm, const TrackingContext&) {
    const int d = static_cast<int>(m0.size());
    Tensor a(1, d), g(1, d);
    std::copy(m0.begin(), m0.end(), a.row(0));
    std::copy(dm.begin(), dm.end(), g.row(0));
    const Tensor dq = net.predict(a, g);
    kin::JointConfig out(dq.cols);
    for (int j = 0; j < dq.cols; ++j) out[j] = dq(0, j);
    return out;
  };
}

TrackingPredictor oracle_tracking_predictor() {
  return [](std::span<const float>, std::span<const float>, const TrackingContext& ctx) {
    return kin::JointConfig(ctx.q_reference - ctx.q_current);
  };
}

TrackingResult tracking_benchmark(const TrackingPredictor& predictor, const kin::KinematicChain& chain,
                                  const morph::SkinLayout& layout, const kin::JointConfig& q_start,
                                  const kin::JointConfig& q_goal, int steps) {
  const auto reference = kin::interpolate_configs(q_start, q_goal, steps);
  const int points = layout.count();
  TrackingResult result;
  kin::JointConfig q = q_start;
  std::vector<float> m0(static_cast<std::size_t>(3 * points)), dm(m0.size());
  std::vector<double> step_means;

  for (int k = 1; k < steps; ++k) {
    const auto current = morph::compute_morphology(chain, layout, q).positions;
    const auto target = morph::compute_morphology(chain, layout, reference[static_cast<std::size_t>(k)]).positions;
    for (int p = 0; p < points; ++p)
      for (int c = 0; c < 3; ++c) {
        m0[static_cast<std::size_t>(3 * p + c)] = static_cast<float>(current(p, c));
        dm[static_cast<std::size_t>(3 * p + c)] = static_cast<float>(target(p, c) - current(p, c));
      }
    const TrackingContext ctx{k, q, reference[static_cast<std::size_t>(k)]};
    const kin::JointConfig dq = predictor(m0, dm, ctx);
    if (dq.size() != q.size() || !dq.allFinite())
      throw RuntimeFailure("tracking: invalid prediction at step " + std::to_string(k));
    q = chain.clamp(q + dq);

    const auto achieved = morph::compute_morphology(chain, layout, q).positions;
    std::vector<double> errs(static_cast<std::size_t>(points));
    for (int p = 0; p < points; ++p) errs[static_cast<std::size_t>(p)] = (achieved.row(p) - target.row(p)).norm();
    TrackingStep st;
    st.step = k;
    st.error = summarize(errs);
    st.q = q;
    result.max_step_error = std::max(result.max_step_error, st.error.mean);
    result.max_point_error = std::max(result.max_point_error, st.error.max);
    step_means.push_back(st.error.mean);
    result.steps.push_back(std::move(st));
  }
  result.median_step_error = stats::quantile(step_means, 0.5);
  result.final_step_error = step_means.back();
  result.non_exploding = result.final_step_error <= 3.0 * result.median_step_error + 1e-9;
  return result;
}

void write_tracking_csv(const std::string& path, const TrackingResult& result) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << "step,mean_point_error_m,median_point_error_m,max_point_error_m\n";
  char buf[160];
  for (const auto& s : result.steps) {
    std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g\n", s.step, s.error.mean, s.error.median, s.error.max);
    out << buf;
  }
  if (!out) throw RuntimeFailure("write failed: " + path);
}

}  // namespace morphoguard::eval
