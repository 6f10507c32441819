// morphoguard: data generation, training, evaluation, sweeps and reports.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "morphoguard/checkpoint.hpp"
#include "morphoguard/dataset.hpp"
#include "morphoguard/evaluation.hpp"
#include "morphoguard/kvtext.hpp"
#include "morphoguard/manifest.hpp"
#include "morphoguard/simd/kernels.hpp"
#include "morphoguard/svg.hpp"
#include "morphoguard/sweep.hpp"
#include "morphoguard/training.hpp"

namespace fs = std::filesystem;
using namespace morphoguard;

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MORPHO_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw ConfigError("MORPHO_SEED must be an unsigned integer");
    return v;
  }
  return 1;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string parent_dir(const std::string& path) {
  const auto p = fs::path(path).parent_path();
  return p.empty() ? "." : p.string();
}

kin::JointConfig parse_config_list(const std::string& text, int dof, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str()) throw ConfigError(flag + ": bad number '" + item + "'");
    values.push_back(v);
  }
  if (static_cast<int>(values.size()) != dof)
    throw ConfigError(flag + ": expected " + std::to_string(dof) + " joint values, got " +
                      std::to_string(values.size()));
  return Eigen::Map<const Eigen::VectorXd>(values.data(), dof);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const auto v = std::strtoull(item.c_str(), &end, 10);
    if (end == item.c_str() || *end != '\0') throw ConfigError("--seeds: bad seed '" + item + "'");
    seeds.push_back(v);
  }
  return seeds;
}

struct ReplayData {
  data::Dataset ds;
  data::Sidecar sc;
  kin::KinematicChain chain;
  morph::SkinLayout layout;
};

ReplayData load_replay(const std::string& data_path) {
  ReplayData r;
  r.ds = data::read_dataset(data_path);
  const auto sc_path = data::sidecar_path(data_path);
  if (!fs::exists(sc_path)) throw ConfigError("missing sidecar " + sc_path + " (start configurations for " + data_path + ")");
  r.sc = data::read_sidecar(sc_path);
  r.chain = kin::parse_robot(r.sc.robot_text, sc_path + " (robot)");
  r.layout = morph::parse_skin(r.sc.skin_text, sc_path + " (skin)");
  if (data::layout_digest(r.chain, r.layout) != r.ds.header.layout_digest)
    throw ConfigError("sidecar " + sc_path + " does not describe the robot/skin of " + data_path);
  return r;
}

// ---- gen-data ---------------------------------------------------------------

struct GenArgs {
  std::string robot, skin, out, mixture;
  std::size_t pairs = 100000;
  double spacing = 0.002;
  int anchors = 6;
  std::size_t per_traj = 1000;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_gen_data(const GenArgs& a) {
  const auto t0 = Clock::now();
  const auto chain = kin::load_robot(a.robot);
  const auto layout = morph::load_skin(a.skin);
  layout.validate(chain);
  data::CorpusParams p;
  p.pairs = a.pairs;
  p.spacing = a.spacing;
  p.anchors_per_trajectory = a.anchors;
  p.pairs_per_trajectory = a.per_traj;
  if (!a.mixture.empty()) p.mixture = data::IntervalMixture::parse(a.mixture);
  p.seed = a.seed.value_or(default_seed());
  p.jobs = a.jobs;
  if (p.spacing <= 0) throw ConfigError("--spacing must be positive");
  if (p.jobs < 1) throw ConfigError("--jobs must be >= 1");

  const auto built = data::build_dataset(chain, layout, p);
  const auto& ds = built.dataset;
  const auto dir = parent_dir(a.out);
  fs::create_directories(dir);
  data::write_dataset(ds, a.out);
  data::write_sidecar(built.sidecar, data::sidecar_path(a.out));

  std::cout << "records " << ds.size() << " (dof " << ds.dof() << ", points " << ds.header.points << ")\n";
  std::cout << "split train " << ds.count(data::Split::train) << " val " << ds.count(data::Split::val) << " test "
            << ds.count(data::Split::test) << "\n";
  std::cout << "trajectories " << built.stats.trajectories << " steps " << built.stats.steps << " segments "
            << built.stats.segments << " ik_failures " << built.stats.traverse.failures << "\n";

  report::RunManifest m;
  m.command = "gen-data";
  m.config = {{"robot", a.robot}, {"skin", a.skin}, {"params", p.describe()}, {"out", a.out}, {"jobs", std::to_string(a.jobs)}};
  m.seeds = {p.seed};
  m.inputs = {a.robot, a.skin};
  m.outputs = {a.out, data::sidecar_path(a.out)};
  m.wall_seconds = seconds_since(t0);
  report::write_manifest(dir, m);
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainArgs {
  std::string data, preset, config, fusion, out;
  int epochs = 10;
  int batch = 64;
  double lr = 1e-3, lr_min = 1e-5;
  std::optional<double> lambda_m, lambda_g, sigma;
  std::size_t max_train = 0;
  std::optional<std::uint64_t> seed;
  bool no_timing = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const auto t0 = Clock::now();
  if (a.preset.empty() == a.config.empty()) throw ConfigError("give exactly one of --preset or --config");
  const auto ds = data::read_dataset(a.data);
  const int in = static_cast<int>(ds.feature_dim());
  const int n = static_cast<int>(ds.dof());
  auto cfg = a.preset.empty() ? model::load_model_config(a.config) : model::preset_config(a.preset, in, n);
  if (!a.fusion.empty()) cfg.fusion = model::parse_fusion(a.fusion);
  const auto seed = a.seed.value_or(default_seed());
  cfg.seed = seed;
  train::TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch = a.batch;
  tc.lr = a.lr;
  tc.lr_min = a.lr_min;
  tc.lambda_m = a.lambda_m.value_or(cfg.lambda_m);
  tc.lambda_g = a.lambda_g.value_or(cfg.lambda_g);
  tc.sigma = a.sigma.value_or(cfg.noise_sigma);
  tc.seed = seed;
  tc.max_train_samples = a.max_train;
  tc.record_time = !a.no_timing;
  tc.validate();
  cfg.validate();
  train::check_compatible(cfg, ds.header);

  model::MorphoGuardNet net(cfg);
  if (!a.quiet)
    std::cout << "model " << cfg.preset << " fusion " << model::fusion_name(cfg.fusion) << " params "
              << net.parameter_count() << " kernels " << simd::active().name << "\n";
  const auto result = train::train(net, ds, tc, a.out, [&](const train::MetricsRow& r) {
    if (a.quiet) return;
    std::printf("epoch %d train %.6g (lm %.6g lg %.6g) val %.6g rmse %.5g rad (%.4g deg) %.1fs\n", r.epoch,
                r.train_total, r.train_lm, r.train_lg, r.val_total, r.val_joint_rmse_rad,
                rad_to_deg(r.val_joint_rmse_rad), r.seconds);
    std::fflush(stdout);
  });
  std::cout << "best epoch " << result.best_epoch << " val " << result.best_val_total << "\n";

  report::RunManifest m;
  m.command = "train";
  m.config = {{"model", model::to_text(net.config())}, {"train", tc.describe()}, {"data", a.data}};
  m.seeds = {seed};
  m.inputs = {a.data};
  if (!a.config.empty()) m.inputs.push_back(a.config);
  const auto out = fs::path(a.out);
  m.outputs = {(out / "metrics.csv").string(), (out / "best.mgc").string(), (out / "last.mgc").string()};
  m.wall_seconds = seconds_since(t0);
  report::write_manifest(a.out, m);
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt, data, split = "test", report, predictor = "net";
};

int cmd_eval(const EvalArgs& a) {
  const auto t0 = Clock::now();
  auto replay = load_replay(a.data);
  const auto split = data::parse_split(a.split);
  const auto rows = replay.ds.indices(split);
  if (rows.empty()) throw ConfigError("split '" + a.split + "' is empty");

  std::unique_ptr<model::MorphoGuardNet> net;
  eval::Predictor predictor;
  if (a.predictor == "net") {
    if (a.ckpt.empty()) throw ConfigError("--ckpt is required for --predictor net");
    net = model::load_checkpoint(a.ckpt);
    train::check_compatible(net->config(), replay.ds.header);
    predictor = eval::net_predictor(*net);
  } else if (a.predictor == "oracle") {
    predictor = eval::oracle_predictor(replay.ds);
  } else if (a.predictor == "zero") {
    predictor = eval::zero_predictor(static_cast<int>(replay.ds.dof()));
  } else {
    throw ConfigError("--predictor must be net, oracle or zero");
  }
  const auto rep = eval::contact_point_error(predictor, replay.chain, replay.layout, replay.ds, replay.sc, rows);
  std::cout << eval::format_eval_summary(rep);
  if (!a.report.empty()) {
    fs::create_directories(parent_dir(a.report));
    eval::write_eval_csv(a.report, rep);
    report::RunManifest m;
    m.command = "eval";
    m.config = {{"split", a.split}, {"predictor", a.predictor}, {"summary", eval::format_eval_summary(rep)}};
    m.inputs = {a.data, data::sidecar_path(a.data)};
    if (!a.ckpt.empty()) m.inputs.push_back(a.ckpt);
    m.outputs = {a.report};
    m.wall_seconds = seconds_since(t0);
    report::write_manifest(parent_dir(a.report), m);
  }
  return 0;
}

// ---- track ------------------------------------------------------------------

struct TrackArgs {
  std::string ckpt, robot, skin, from, to, out, predictor = "net";
  int steps = 150;
};

int cmd_track(const TrackArgs& a) {
  const auto t0 = Clock::now();
  const auto chain = kin::load_robot(a.robot);
  const auto layout = morph::load_skin(a.skin);
  layout.validate(chain);
  const auto q_from = parse_config_list(a.from, chain.dof(), "--from");
  const auto q_to = parse_config_list(a.to, chain.dof(), "--to");
  if (!chain.within_limits(q_from) || !chain.within_limits(q_to)) throw ConfigError("--from/--to outside joint limits");
  if (a.steps < 2) throw ConfigError("--steps must be >= 2");

  std::unique_ptr<model::MorphoGuardNet> net;
  eval::TrackingPredictor predictor;
  if (a.predictor == "net") {
    if (a.ckpt.empty()) throw ConfigError("--ckpt is required for --predictor net");
    net = model::load_checkpoint(a.ckpt);
    if (net->config().input_dim != 3 * layout.count() || net->config().output_dim != chain.dof())
      throw ConfigError("checkpoint dims (" + std::to_string(net->config().input_dim) + " -> " +
                        std::to_string(net->config().output_dim) + ") do not match robot/skin (" +
                        std::to_string(3 * layout.count()) + " -> " + std::to_string(chain.dof()) + ")");
    predictor = eval::net_tracking_predictor(*net);
  } else if (a.predictor == "oracle") {
    predictor = eval::oracle_tracking_predictor();
  } else {
    throw ConfigError("--predictor must be net or oracle");
  }
  const auto result = eval::tracking_benchmark(predictor, chain, layout, q_from, q_to, a.steps);
  std::printf("steps %zu max_step_error %.6g m max_point_error %.6g m median %.6g m final %.6g m %s\n",
              result.steps.size(), result.max_step_error, result.max_point_error, result.median_step_error,
              result.final_step_error, result.non_exploding ? "stable" : "EXPLODING");
  if (!a.out.empty()) {
    fs::create_directories(parent_dir(a.out));
    eval::write_tracking_csv(a.out, result);
    report::RunManifest m;
    m.command = "track";
    m.config = {{"from", a.from}, {"to", a.to}, {"steps", std::to_string(a.steps)}, {"predictor", a.predictor}};
    m.inputs = {a.robot, a.skin};
    if (!a.ckpt.empty()) m.inputs.push_back(a.ckpt);
    m.outputs = {a.out};
    m.wall_seconds = seconds_since(t0);
    report::write_manifest(parent_dir(a.out), m);
  }
  return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepArgs {
  std::string kind, data, seeds = "1,2,3", out_dir, preset = "ci_128", presets = "ci_128,micro_1m,small_5m";
  int epochs = 5, batch = 64, jobs = 1;
  double lr = 1e-3;
  std::size_t max_train = 0;
};

int cmd_sweep(const SweepArgs& a) {
  const auto t0 = Clock::now();
  const auto kind = eval::parse_sweep_kind(a.kind);
  const auto ds = data::read_dataset(a.data);
  const int in = static_cast<int>(ds.feature_dim());
  const int n = static_cast<int>(ds.dof());
  std::vector<eval::SweepVariant> variants;
  if (kind == eval::SweepKind::fusion) {
    variants = eval::fusion_variants(in, n, a.preset);
  } else {
    std::vector<std::string> names;
    std::stringstream ss(a.presets);
    std::string item;
    while (std::getline(ss, item, ',')) names.push_back(item);
    variants = eval::scale_variants(in, n, names);
  }
  train::TrainConfig budget;
  budget.epochs = a.epochs;
  budget.batch = a.batch;
  budget.lr = a.lr;
  budget.lr_min = std::min(budget.lr_min, a.lr);
  budget.max_train_samples = a.max_train;
  budget.validate();
  const auto seeds = parse_seeds(a.seeds);

  const auto out = eval::run_sweep(kind, variants, ds, budget, seeds, a.jobs, [](const eval::SweepRun& r) {
    std::printf("%s seed %llu val %.6g %s\n", r.variant.c_str(), static_cast<unsigned long long>(r.seed), r.val_loss,
                r.converged ? "converged" : "NOT converged");
    std::fflush(stdout);
  });
  fs::create_directories(a.out_dir);
  const auto dir = fs::path(a.out_dir);
  const auto csv = (dir / "sweep.csv").string();
  const auto curves = (dir / "curves.csv").string();
  const auto md = (dir / "sweep.md").string();
  const auto svg = (dir / "curves.svg").string();
  eval::write_sweep_csv(csv, out);
  eval::write_curves_csv(curves, out);
  const auto table = eval::sweep_markdown(out);
  std::ofstream(md) << table;
  std::cout << table;

  std::vector<report::Series> series;
  for (const auto& r : out.results) {
    report::Series s{r.variant, {}, {}};
    std::map<int, std::pair<double, int>> by_epoch;
    for (const auto& run : out.runs)
      if (run.variant == r.variant)
        for (const auto& m : run.metrics) {
          by_epoch[m.epoch].first += m.val_total;
          by_epoch[m.epoch].second += 1;
        }
    for (const auto& [e, acc] : by_epoch) {
      s.x.push_back(e);
      s.y.push_back(acc.first / acc.second);
    }
    series.push_back(std::move(s));
  }
  std::ofstream(svg) << report::line_plot_svg(series, std::string(eval::sweep_kind_name(kind)) + " sweep: validation loss",
                                              "epoch", "val loss (mean over seeds)", true);
  if (kind == eval::SweepKind::scale) {
    const auto check = eval::scale_monotone_check(out.results);
    std::cout << "monotone region check: " << (check.holds ? "holds" : "violated") << "\n" << check.detail;
  }

  report::RunManifest m;
  m.command = "sweep";
  m.config = {{"kind", a.kind}, {"budget", budget.describe()}, {"preset", a.preset}, {"presets", a.presets}};
  m.seeds = seeds;
  m.inputs = {a.data};
  m.outputs = {csv, curves, md, svg};
  m.wall_seconds = seconds_since(t0);
  report::write_manifest(a.out_dir, m);
  return 0;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::string csv, svg;
  bool log_y = false;
};

int cmd_report(const ReportArgs& a) {
  std::ifstream in(a.csv);
  if (!in) throw ConfigError("cannot read " + a.csv);
  std::string header;
  if (!std::getline(in, header) || header.empty()) throw ConfigError(a.csv + ": empty CSV");
  std::vector<report::Series> series;
  std::string title;
  if (header == train::metrics_header()) {
    const auto rows = train::read_metrics_csv(a.csv);
    if (rows.empty()) throw ConfigError(a.csv + ": no metrics rows");
    report::Series tr{"train L_total", {}, {}}, va{"val L_total", {}, {}};
    for (const auto& r : rows) {
      tr.x.push_back(r.epoch);
      tr.y.push_back(r.train_total);
      va.x.push_back(r.epoch);
      va.y.push_back(r.val_total);
    }
    series = {tr, va};
    title = "training and validation loss";
  } else if (header == "variant,seed,epoch,train_total,val_total") {
    std::map<std::string, std::map<int, std::pair<double, int>>> acc;
    std::vector<std::string> order;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string variant, seed, epoch, tr, va;
      if (!std::getline(ss, variant, ',') || !std::getline(ss, seed, ',') || !std::getline(ss, epoch, ',') ||
          !std::getline(ss, tr, ',') || !std::getline(ss, va, ','))
        throw ConfigError(a.csv + ":" + std::to_string(lineno) + ": malformed row");
      if (!acc.count(variant)) order.push_back(variant);
      auto& e = acc[variant][std::stoi(epoch)];
      e.first += std::stod(va);
      e.second += 1;
    }
    if (order.empty()) throw ConfigError(a.csv + ": no curve rows");
    for (const auto& v : order) {
      report::Series s{v, {}, {}};
      for (const auto& [e, p] : acc[v]) {
        s.x.push_back(e);
        s.y.push_back(p.first / p.second);
      }
      series.push_back(std::move(s));
    }
    title = "validation loss by variant";
  } else {
    throw ConfigError(a.csv + ": unrecognized CSV header '" + header + "'");
  }
  const auto svg = report::line_plot_svg(series, title, "epoch", "loss", a.log_y);
  fs::create_directories(parent_dir(a.svg));
  std::ofstream(a.svg) << svg;
  report::RunManifest m;
  m.command = "report";
  m.inputs = {a.csv};
  m.outputs = {a.svg};
  report::write_manifest(parent_dir(a.svg), m);
  std::cout << "wrote " << a.svg << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"morphoguard: morphology-based learned inverse kinematics"};
  app.require_subcommand(1);
  app.set_version_flag("--version", MORPHOGUARD_VERSION);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a morphology-pair dataset by workspace traversal");
  g->add_option("--robot", gen.robot, "Robot description file")->required();
  g->add_option("--skin", gen.skin, "Skin (material point) layout file")->required();
  g->add_option("--out", gen.out, "Output dataset path (sidecar written to <out>.q0)")->required();
  g->add_option("--pairs", gen.pairs, "Number of pairs")->capture_default_str();
  g->add_option("--spacing", gen.spacing, "Path spacing in meters")->capture_default_str();
  g->add_option("--anchors", gen.anchors, "Random anchors per trajectory")->capture_default_str();
  g->add_option("--pairs-per-trajectory", gen.per_traj, "Pairs drawn from each trajectory")->capture_default_str();
  g->add_option("--mixture", gen.mixture, "Interval mixture 'w:mean:std,...' (default 0.5:35:12,0.5:100:25)");
  g->add_option("--seed", gen.seed, "Master seed (default: MORPHO_SEED or 1)");
  g->add_option("--jobs", gen.jobs, "Worker threads")->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a network on a dataset");
  t->add_option("--data", tr.data, "Dataset path")->required();
  t->add_option("--preset", tr.preset, "Named architecture preset");
  t->add_option("--config", tr.config, "Model config file (instead of --preset)");
  t->add_option("--fusion", tr.fusion, "Override fusion method");
  t->add_option("--epochs", tr.epochs, "Epochs")->capture_default_str();
  t->add_option("--batch", tr.batch, "Batch size")->capture_default_str();
  t->add_option("--lr", tr.lr, "Initial learning rate")->capture_default_str();
  t->add_option("--lr-min", tr.lr_min, "Cosine decay floor")->capture_default_str();
  t->add_option("--lambda-m", tr.lambda_m, "Motion loss weight (default from config)");
  t->add_option("--lambda-g", tr.lambda_g, "Noise loss weight (default from config)");
  t->add_option("--sigma", tr.sigma, "Training input noise std in meters (default from config)");
  t->add_option("--max-train", tr.max_train, "Use at most this many train records (0 = all)");
  t->add_option("--seed", tr.seed, "Seed (default: MORPHO_SEED or 1)");
  t->add_flag("--no-timing", tr.no_timing, "Write 0 in the seconds column for byte-identical reruns");
  t->add_flag("--quiet", tr.quiet, "Only print the final line");
  t->add_option("--out", tr.out, "Output directory")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Contact-point and joint error on a dataset split");
  e->add_option("--ckpt", ev.ckpt, "Checkpoint (required for --predictor net)");
  e->add_option("--data", ev.data, "Dataset path (sidecar must exist)")->required();
  e->add_option("--split", ev.split, "train, val or test")->capture_default_str();
  e->add_option("--predictor", ev.predictor, "net, oracle or zero")->capture_default_str();
  e->add_option("--report", ev.report, "Per-record error CSV");

  TrackArgs tk;
  auto* k = app.add_subcommand("track", "Closed-loop morphology tracking along an interpolated path");
  k->add_option("--ckpt", tk.ckpt, "Checkpoint (required for --predictor net)");
  k->add_option("--robot", tk.robot, "Robot description file")->required();
  k->add_option("--skin", tk.skin, "Skin layout file")->required();
  k->add_option("--from", tk.from, "Start configuration, comma separated radians")->required();
  k->add_option("--to", tk.to, "Goal configuration, comma separated radians")->required();
  k->add_option("--steps", tk.steps, "Reference steps")->capture_default_str();
  k->add_option("--predictor", tk.predictor, "net or oracle")->capture_default_str();
  k->add_option("--out", tk.out, "Per-step error CSV");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Fusion or scale comparison across seeds");
  s->add_option("--kind", sw.kind, "fusion or scale")->required();
  s->add_option("--data", sw.data, "Dataset path")->required();
  s->add_option("--seeds", sw.seeds, "Comma separated seeds")->capture_default_str();
  s->add_option("--epochs,--budget", sw.epochs, "Epochs per run")->capture_default_str();
  s->add_option("--batch", sw.batch, "Batch size")->capture_default_str();
  s->add_option("--lr", sw.lr, "Initial learning rate")->capture_default_str();
  s->add_option("--max-train", sw.max_train, "Train records per run (0 = all)");
  s->add_option("--preset", sw.preset, "Backbone preset for the fusion sweep")->capture_default_str();
  s->add_option("--presets", sw.presets, "Preset ladder for the scale sweep, smallest first")->capture_default_str();
  s->add_option("--jobs", sw.jobs, "Concurrent runs")->capture_default_str();
  s->add_option("--out-dir", sw.out_dir, "Output directory")->required();

  ReportArgs rp;
  auto* r = app.add_subcommand("report", "Plot a metrics or sweep-curves CSV as SVG");
  r->add_option("--csv", rp.csv, "metrics.csv or curves.csv")->required();
  r->add_option("--svg", rp.svg, "Output SVG path")->required();
  r->add_flag("--log-y", rp.log_y, "Logarithmic loss axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    if (*g) return cmd_gen_data(gen);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*k) return cmd_track(tk);
    if (*s) return cmd_sweep(sw);
    if (*r) return cmd_report(rp);
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const RuntimeFailure& ex) {
    std::cerr << "failure: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "failure: " << ex.what() << "\n";
    return 1;
  }
  return 2;
}
