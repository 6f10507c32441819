#include "morphoguard/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "morphoguard/model.hpp"
#include "morphoguard/stats.hpp"

namespace morphoguard::eval {

const char* sweep_kind_name(SweepKind k) { return k == SweepKind::fusion ? "fusion" : "scale"; }

SweepKind parse_sweep_kind(std::string_view name) {
  if (name == "fusion") return SweepKind::fusion;
  if (name == "scale") return SweepKind::scale;
  throw ConfigError("unknown sweep kind '" + std::string(name) + "' (expected fusion or scale)");
}

std::vector<SweepVariant> fusion_variants(int input_dim, int output_dim, std::string_view preset) {
  std::vector<SweepVariant> out;
  for (auto f : model::sweep_fusion_methods()) {
    auto cfg = model::preset_config(preset, input_dim, output_dim);
    cfg.fusion = f;
    out.push_back({model::fusion_name(f), cfg});
  }
  return out;
}

std::vector<SweepVariant> scale_variants(int input_dim, int output_dim, const std::vector<std::string>& presets) {
  std::vector<SweepVariant> out;
  for (const auto& p : presets) out.push_back({p, model::preset_config(p, input_dim, output_dim)});
  return out;
}

namespace {

SweepRun run_one(const SweepVariant& v, std::uint64_t seed, const data::Dataset& ds, train::TrainConfig cfg) {
  auto mc = v.config;
  mc.seed = seed;
  cfg.seed = seed;
  cfg.record_time = false;
  model::MorphoGuardNet net(mc);
  SweepRun run;
  run.variant = v.name;
  run.seed = seed;
  try {
    run.metrics = train::train(net, ds, cfg, "").metrics;
  } catch (const std::exception& e) {
    throw RuntimeFailure("sweep variant '" + v.name + "' seed " + std::to_string(seed) + " failed: " + e.what());
  }
  std::vector<double> vals;
  for (const auto& m : run.metrics) vals.push_back(m.val_total);
  run.val_loss = vals.back();
  run.val_std_epochs = stats::stddev(vals);
  run.converged = run.metrics.back().train_total < 0.5 * run.metrics.front().train_total;
  return run;
}

}  // namespace

SweepOutput run_sweep(SweepKind kind, const std::vector<SweepVariant>& variants, const data::Dataset& ds,
                      const train::TrainConfig& budget, const std::vector<std::uint64_t>& seeds, int jobs,
                      const std::function<void(const SweepRun&)>& on_run) {
  if (variants.empty()) throw ConfigError("sweep needs at least one variant");
  if (seeds.size() < 2) throw ConfigError("sweep needs at least two seeds for significance");
  for (const auto& v : variants) train::check_compatible(v.config, ds.header);

  const std::size_t total = variants.size() * seeds.size();
  SweepOutput out;
  out.kind = kind;
  out.runs.resize(total);
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard lock(mu);
        if (next >= total || error) return;
        idx = next++;
      }
      try {
        auto run = run_one(variants[idx / seeds.size()], seeds[idx % seeds.size()], ds, budget);
        std::lock_guard lock(mu);
        out.runs[idx] = std::move(run);
        if (on_run) on_run(out.runs[idx]);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  out.results = summarize_sweep(out.runs);
  return out;
}

std::vector<SweepResult> summarize_sweep(const std::vector<SweepRun>& runs) {
  std::vector<SweepResult> results;
  std::vector<std::vector<double>> epoch_losses;
  for (const auto& run : runs) {
    if (results.empty() || results.back().variant != run.variant) {
      results.push_back({});
      results.back().variant = run.variant;
      results.back().converged = true;
      epoch_losses.emplace_back();
    }
    auto& r = results.back();
    r.seed_losses.push_back(run.val_loss);
    r.val_std_epochs += run.val_std_epochs;
    r.converged = r.converged && run.converged;
    for (const auto& m : run.metrics) epoch_losses.back().push_back(m.val_total);
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto& r = results[i];
    r.baseline = i == 0;
    r.val_loss_mean = stats::mean(r.seed_losses);
    r.val_std_seeds = stats::stddev(r.seed_losses);
    r.val_std_epochs /= static_cast<double>(r.seed_losses.size());
    const auto& base = results.front();
    r.rel_improvement_pct = r.baseline ? 0.0 : stats::relative_improvement(r.val_loss_mean, base.val_loss_mean);
    if (!r.baseline) {
      r.p_value = stats::welch_t_test(r.seed_losses, base.seed_losses).p_value;
      r.p_value_epochs = stats::welch_t_test(epoch_losses[i], epoch_losses.front()).p_value;
      r.significant = *r.p_value < 0.05;
    }
  }
  return results;
}

std::string sweep_csv_header() { return "variant,seed,val_loss,val_std_epochs,rel_improvement_pct,p_value,significant"; }

void write_sweep_csv(const std::string& path, const SweepOutput& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write " + path);
  f << sweep_csv_header() << "\n";
  char buf[256];
  std::size_t run = 0;
  for (const auto& r : out.results) {
    for (std::size_t s = 0; s < r.seed_losses.size(); ++s, ++run) {
      const auto& sr = out.runs[run];
      std::snprintf(buf, sizeof buf, "%s,%llu,%.9g,%.9g,,,\n", sr.variant.c_str(),
                    static_cast<unsigned long long>(sr.seed), sr.val_loss, sr.val_std_epochs);
      f << buf;
    }
    if (r.baseline) {
      std::snprintf(buf, sizeof buf, "%s,mean,%.9g,%.9g,0,,\n", r.variant.c_str(), r.val_loss_mean, r.val_std_epochs);
    } else {
      std::snprintf(buf, sizeof buf, "%s,mean,%.9g,%.9g,%.4f,%.6g,%s\n", r.variant.c_str(), r.val_loss_mean,
                    r.val_std_epochs, r.rel_improvement_pct, *r.p_value, r.significant ? "true" : "false");
    }
    f << buf;
  }
  if (!f) throw RuntimeFailure("write failed: " + path);
}

void write_curves_csv(const std::string& path, const SweepOutput& out) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw RuntimeFailure("cannot write " + path);
  f << "variant,seed,epoch,train_total,val_total\n";
  char buf[256];
  for (const auto& run : out.runs)
    for (const auto& m : run.metrics) {
      std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.9g,%.9g\n", run.variant.c_str(),
                    static_cast<unsigned long long>(run.seed), m.epoch, m.train_total, m.val_total);
      f << buf;
    }
  if (!f) throw RuntimeFailure("write failed: " + path);
}

std::string sweep_markdown(const SweepOutput& out) {
  std::ostringstream os;
  os << "| " << (out.kind == SweepKind::fusion ? "Fusion Method" : "Model Size")
     << " | Val Loss | Val Std | Rel Improvement (%) | p-value | Sig | Seed Std | p-value (epochs) | Converged |\n";
  os << "|---|---|---|---|---|---|---|---|---|\n";
  char buf[512];
  for (const auto& r : out.results) {
    const std::string p = r.p_value ? std::to_string(*r.p_value) : "-";
    const std::string pe = r.p_value_epochs ? std::to_string(*r.p_value_epochs) : "-";
    const char* sig = r.baseline ? "-" : (r.significant ? "*" : "ns");
    std::snprintf(buf, sizeof buf, "| %s%s | %.4g | %.4g | %.2f | %s | %s | %.4g | %s | %s |\n", r.variant.c_str(),
                  r.baseline ? " (baseline)" : "", r.val_loss_mean, r.val_std_epochs, r.rel_improvement_pct,
                  p.c_str(), sig, r.val_std_seeds, pe.c_str(), r.converged ? "yes" : "no");
    os << buf;
  }
  os << "\nVal Std is the across-epoch standard deviation; Seed Std is across seeds. "
        "p-values come from Welch's t test against the baseline row.\n";
  return os.str();
}

MonotoneCheck scale_monotone_check(const std::vector<SweepResult>& results) {
  MonotoneCheck check;
  std::ostringstream os;
  for (std::size_t i = 1; i < results.size(); ++i) {
    const auto& small = results[i - 1];
    const auto& large = results[i];
    const double pooled = std::sqrt(0.5 * (small.val_std_seeds * small.val_std_seeds +
                                           large.val_std_seeds * large.val_std_seeds));
    const bool ok = large.val_loss_mean <= small.val_loss_mean + pooled;
    check.holds = check.holds && ok;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s %.6g <= %s %.6g + %.3g : %s\n", large.variant.c_str(), large.val_loss_mean,
                  small.variant.c_str(), small.val_loss_mean, pooled, ok ? "ok" : "violated");
    os << buf;
  }
  check.detail = os.str();
  return check;
}

}  // namespace morphoguard::eval
