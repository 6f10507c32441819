#include "morphoguard/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "morphoguard/checkpoint.hpp"
#include "morphoguard/optim.hpp"

namespace morphoguard::train {

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (batch < 1) fail("batch must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(lr > 0.0) || !(lr_min >= 0.0) || lr_min > lr) fail("need 0 <= lr_min <= lr and lr > 0");
  if (!(lambda_m >= 0.0) || !(lambda_g >= 0.0)) fail("loss weights must be >= 0");
  if (!(sigma >= 0.0)) fail("sigma must be >= 0");
  if (val_every < 1) fail("val_every must be >= 1");
  if (eval_batch < 1) fail("eval_batch must be >= 1");
}

std::string TrainConfig::describe() const {
  std::ostringstream os;
  os << "batch=" << batch << " lr=" << lr << " lr_min=" << lr_min << " epochs=" << epochs << " lambda_m=" << lambda_m
     << " lambda_g=" << lambda_g << " sigma=" << sigma << " seed=" << seed << " shuffle=" << shuffle
     << " val_every=" << val_every << " max_train_samples=" << max_train_samples;
  return os.str();
}

double loss_motion(const Tensor& pred, const Tensor& truth, Tensor* grad, double weight) {
  if (!pred.same_shape(truth)) throw ConfigError("loss_motion: shape mismatch");
  if (pred.rows == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred.data[i]) - truth.data[i];
    sum += d * d;
  }
  if (grad != nullptr) {
    grad->resize(pred.rows, pred.cols);
    const double s = 2.0 * weight / pred.rows;
    for (std::size_t i = 0; i < pred.size(); ++i)
      grad->data[i] = static_cast<real>(s * (static_cast<double>(pred.data[i]) - truth.data[i]));
  }
  return sum / pred.rows;
}

double loss_noise(const Tensor& eps_pred, const Tensor& eps_true, double lambda, Tensor* grad, double weight) {
  const double base = loss_motion(eps_pred, eps_true, grad, weight * lambda);
  return lambda * base;
}

void check_compatible(const model::ModelConfig& cfg, const data::DatasetHeader& header) {
  const int in = static_cast<int>(3 * header.points);
  if (cfg.input_dim != in) {
    std::ostringstream os;
    os << "input_dim " << cfg.input_dim << " ≠ dataset 3M=" << in;
    throw ConfigError(os.str());
  }
  if (cfg.output_dim != static_cast<int>(header.dof)) {
    std::ostringstream os;
    os << "output_dim " << cfg.output_dim << " ≠ dataset n=" << header.dof;
    throw ConfigError(os.str());
  }
}

model::Normalization compute_normalization(const data::Dataset& ds, std::span<const std::size_t> rows, double sigma) {
  const std::size_t d = ds.feature_dim();
  const std::size_t n = ds.dof();
  if (rows.empty()) throw ConfigError("cannot estimate normalization from an empty split");
  std::vector<double> sum(d, 0.0), sq(d, 0.0), dm_sq(d, 0.0), dq_sq(n, 0.0);
  for (std::size_t r : rows) {
    const auto m0 = ds.m0_row(r);
    const auto dm = ds.dm_row(r);
    const auto dq = ds.dq_row(r);
    for (std::size_t c = 0; c < d; ++c) {
      sum[c] += m0[c];
      sq[c] += static_cast<double>(m0[c]) * m0[c];
      dm_sq[c] += static_cast<double>(dm[c]) * dm[c];
    }
    for (std::size_t j = 0; j < n; ++j) dq_sq[j] += static_cast<double>(dq[j]) * dq[j];
  }
  const double count = static_cast<double>(rows.size());
  const double noise_var = sigma * sigma;
  model::Normalization out;
  for (std::size_t c = 0; c < d; ++c) {
    const double mean = sum[c] / count;
    const double var = std::max(0.0, sq[c] / count - mean * mean);
    out.m0_mean.push_back(static_cast<float>(mean));
    out.m0_scale.push_back(static_cast<float>(std::max(std::sqrt(var + noise_var), 1e-3)));
    out.dm_scale.push_back(static_cast<float>(std::max(std::sqrt(dm_sq[c] / count + noise_var), 1e-4)));
  }
  for (std::size_t j = 0; j < n; ++j) out.dq_scale.push_back(static_cast<float>(std::max(std::sqrt(dq_sq[j] / count), 1e-4)));
  return out;
}

void gather_batch(const data::Dataset& ds, std::span<const std::size_t> rows, Tensor& m0, Tensor& dm, Tensor* dq) {
  const int d = static_cast<int>(ds.feature_dim());
  const int n = static_cast<int>(ds.dof());
  const int b = static_cast<int>(rows.size());
  m0.resize(b, d);
  dm.resize(b, d);
  if (dq != nullptr) dq->resize(b, n);
  for (int i = 0; i < b; ++i) {
    const std::size_t r = rows[static_cast<std::size_t>(i)];
    std::copy_n(ds.m0_row(r).data(), d, m0.row(i));
    std::copy_n(ds.dm_row(r).data(), d, dm.row(i));
    if (dq != nullptr) std::copy_n(ds.dq_row(r).data(), n, dq->row(i));
  }
}

LossParts evaluate_loss(MorphoGuardNet& net, const data::Dataset& ds, std::span<const std::size_t> rows,
                        double lambda_m, double lambda_g, int batch) {
  LossParts acc;
  if (rows.empty()) return acc;
  Tensor m0, dm, dq;
  for (std::size_t start = 0; start < rows.size(); start += static_cast<std::size_t>(batch)) {
    const auto chunk = rows.subspan(start, std::min<std::size_t>(static_cast<std::size_t>(batch), rows.size() - start));
    gather_batch(ds, chunk, m0, dm, &dq);
    const auto out = net.forward(m0, dm, model::NoiseMode::eval);
    const double w = static_cast<double>(chunk.size());
    acc.lm += w * loss_motion(out.dq, dq);
    acc.lg += w * loss_noise(out.eps_pred, out.eps_true, 1.0);
  }
  acc.lm /= static_cast<double>(rows.size());
  acc.lg /= static_cast<double>(rows.size());
  acc.total = loss_total(acc.lm, acc.lg, lambda_m, lambda_g);
  return acc;
}

TrainResult train(MorphoGuardNet& net, const data::Dataset& ds, const TrainConfig& cfg, const std::string& out_dir,
                  const std::function<void(const MetricsRow&)>& on_epoch) {
  cfg.validate();
  ds.validate();
  check_compatible(net.config(), ds.header);

  std::vector<std::size_t> train_rows = ds.indices(data::Split::train);
  const std::vector<std::size_t> val_rows = ds.indices(data::Split::val);
  if (train_rows.empty()) throw ConfigError("dataset has no train records");
  if (val_rows.empty()) throw ConfigError("dataset has no validation records");
  if (cfg.max_train_samples > 0 && cfg.max_train_samples < train_rows.size()) {
    Rng rng = make_rng(cfg.seed, "subset");
    std::shuffle(train_rows.begin(), train_rows.end(), rng);
    train_rows.resize(cfg.max_train_samples);
    std::sort(train_rows.begin(), train_rows.end());
  }

  net.set_normalization(compute_normalization(ds, train_rows, cfg.sigma));
  net.set_noise_sigma(cfg.sigma);
  net.set_loss_weights(cfg.lambda_m, cfg.lambda_g);
  net.zero_grad();
  auto params = net.parameters();

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  const auto path = [&](const char* name) { return (std::filesystem::path(out_dir) / name).string(); };

  const std::size_t batches = (train_rows.size() + cfg.batch - 1) / cfg.batch;
  const long total_steps = static_cast<long>(batches) * cfg.epochs;
  long step = 0;

  TrainResult result;
  Tensor m0, dm, dq, g_dq, g_eps;
  LossParts last_val;
  bool have_val = false;
  const auto t_start = std::chrono::steady_clock::now();

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = train_rows;
    if (cfg.shuffle) {
      Rng shuffle_rng = make_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
      std::shuffle(order.begin(), order.end(), shuffle_rng);
    }
    Rng noise_rng = make_rng(cfg.seed, "noise", static_cast<std::uint64_t>(epoch));

    LossParts epoch_loss;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t start = b * cfg.batch;
      const auto rows = std::span<const std::size_t>(order).subspan(start, std::min<std::size_t>(cfg.batch, order.size() - start));
      gather_batch(ds, rows, m0, dm, &dq);
      model::ForwardOutput out;
      try {
        out = net.forward(m0, dm, model::NoiseMode::train, &noise_rng);
      } catch (const RuntimeFailure& e) {
        throw RuntimeFailure("epoch " + std::to_string(epoch) + ", batch " + std::to_string(b) + ": " + e.what());
      }
      const double lm = loss_motion(out.dq, dq, &g_dq, cfg.lambda_m);
      const double lg = loss_noise(out.eps_pred, out.eps_true, 1.0, &g_eps, cfg.lambda_g);
      const double total = loss_total(lm, lg, cfg.lambda_m, cfg.lambda_g);
      if (!std::isfinite(total))
        throw RuntimeFailure("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
      net.backward(g_dq, cfg.lambda_g > 0.0 ? &g_eps : nullptr);
      nn::adam_step(params, static_cast<real>(nn::cosine_lr(cfg.lr, cfg.lr_min, step, total_steps)));
      ++step;
      const double w = static_cast<double>(rows.size());
      epoch_loss.lm += w * lm;
      epoch_loss.lg += w * lg;
      epoch_loss.total += w * total;
    }
    const double n_train = static_cast<double>(train_rows.size());

    if (!have_val || epoch % cfg.val_every == 0 || epoch == cfg.epochs) {
      last_val = evaluate_loss(net, ds, val_rows, cfg.lambda_m, cfg.lambda_g, cfg.eval_batch);
      have_val = true;
      if (!std::isfinite(last_val.total)) throw RuntimeFailure("non-finite validation loss at epoch " + std::to_string(epoch));
      if (result.best_epoch == 0 || last_val.total < result.best_val_total) {
        result.best_epoch = epoch;
        result.best_val_total = last_val.total;
        if (!out_dir.empty()) model::save_checkpoint(net, path("best.mgc"));
      }
    }

    MetricsRow row;
    row.epoch = epoch;
    row.train_lm = epoch_loss.lm / n_train;
    row.train_lg = epoch_loss.lg / n_train;
    row.train_total = epoch_loss.total / n_train;
    row.val_total = last_val.total;
    row.val_lm = last_val.lm;
    row.val_lg = last_val.lg;
    row.val_joint_rmse_rad = std::sqrt(last_val.lm / static_cast<double>(ds.dof()));
    row.seconds = cfg.record_time
                      ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count()
                      : 0.0;
    result.metrics.push_back(row);
    if (!out_dir.empty()) write_metrics_csv(path("metrics.csv"), result.metrics);
    if (on_epoch) on_epoch(row);
  }
  if (!out_dir.empty()) model::save_checkpoint(net, path("last.mgc"));
  return result;
}

std::string metrics_header() {
  return "epoch,train_total,train_lm,train_lg,val_total,val_lm,val_lg,val_joint_rmse_rad,seconds";
}

std::string format_metrics_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.3f", r.epoch, r.train_total, r.train_lm,
                r.train_lg, r.val_total, r.val_lm, r.val_lg, r.val_joint_rmse_rad, r.seconds);
  return buf;
}

void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << metrics_header() << "\n";
  for (const auto& r : rows) out << format_metrics_row(r) << "\n";
  if (!out) throw RuntimeFailure("write failed: " + path);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != metrics_header()) throw ConfigError(path + ": missing metrics header");
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    MetricsRow r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.epoch, &r.train_total, &r.train_lm,
                    &r.train_lg, &r.val_total, &r.val_lm, &r.val_lg, &r.val_joint_rmse_rad, &r.seconds) != 9)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed metrics row");
    rows.push_back(r);
  }
  return rows;
}

}  // namespace morphoguard::train
