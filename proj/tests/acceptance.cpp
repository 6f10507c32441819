// Acceptance runner: one PASS/FAIL line per criterion, tolerances fixed below.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "morphoguard/checkpoint.hpp"
#include "morphoguard/datagen.hpp"
#include "morphoguard/dataset.hpp"
#include "morphoguard/evaluation.hpp"
#include "morphoguard/kinematics.hpp"
#include "morphoguard/model.hpp"
#include "morphoguard/simd/kernels.hpp"
#include "morphoguard/stats.hpp"
#include "morphoguard/sweep.hpp"
#include "morphoguard/training.hpp"

namespace fs = std::filesystem;
using namespace morphoguard;
using kin::JointConfig;
using kin::Vec3;
using nn::Tensor;

namespace {

// Criterion 1
constexpr double kFkTol = 1e-9;
constexpr double kJacTol = 1e-6;
constexpr double kJacStep = 1e-6;
constexpr int kJacCases = 100;
constexpr double kC1Seconds = 5;
// Criterion 2
constexpr int kIkTargets = 1000;
constexpr double kIkConvergedFraction = 0.99;
constexpr double kIkTol = 1e-4;
constexpr int kIkMaxIters = 500;
constexpr double kC2Seconds = 60;
// Criterion 3
constexpr std::size_t kLabelPairs = 10000;
constexpr double kLabelTol = 1e-6;
constexpr double kC3Seconds = 60;
// Criterion 4
constexpr std::size_t kProtocolPairs = 100000;
constexpr double kKsMax = 0.05;
constexpr double kC4Seconds = 180;
// Criterion 5
constexpr double kLayerGradTol = 1e-3;
constexpr double kNetGradTol = 1e-2;
constexpr double kMutationMin = 0.1;
constexpr double kC5Seconds = 60;
// Criterion 6
constexpr std::size_t kArmPairs = 100000;
constexpr int kC6Epochs = 20;
constexpr double kMedianMax = 0.02;
constexpr double kP95Max = 0.03;
constexpr double kC6Seconds = 30 * 60;
// Criteria 7 and 8
constexpr std::size_t kCiPairs = 20000;
constexpr int kSweepEpochs = 8;
constexpr double kConvergeRatio = 0.5;
constexpr double kTable3 = 60.27;
constexpr double kTable4 = -101.9;
constexpr double kTable4Tol = 0.2;
constexpr double kC7Seconds = 20 * 60;
constexpr int kScaleEpochs = 8;
constexpr double kC8Seconds = 30 * 60;
// Criterion 9
constexpr int kTrackSteps = 150;
constexpr double kOracleTrackTol = 1e-6;
constexpr double kNetTrackMax = 0.03;
constexpr double kC9Seconds = 120;
constexpr int kPairTracks = 8;
constexpr int kPairTrackMinInterval = 100;
// Criterion 10
constexpr int kWelchCases = 20;
constexpr double kWelchTol = 1e-6;
constexpr double kC10Seconds = 5;

const std::vector<std::uint64_t> kSeeds{1, 2, 3};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path work;
  kin::KinematicChain planar2, arm7;
  morph::SkinLayout planar2_skin, arm7_skin;
  std::string c6_checkpoint;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

JointConfig random_config(const kin::KinematicChain& c, Rng& rng) {
  JointConfig q(c.dof());
  for (int j = 0; j < c.dof(); ++j) q[j] = std::uniform_real_distribution<double>(c.joints[j].lower, c.joints[j].upper)(rng);
  return q;
}

Outcome kinematics_exactness(Context& cx) {
  const auto t0 = Clock::now();
  const struct {
    double q1, q2;
    Vec3 expect;
  } cases[] = {{0, 0, {2, 0, 0}}, {kPi / 2, 0, {0, 2, 0}}, {kPi / 2, -kPi / 2, {1, 1, 0}}};
  double fk_err = 0.0;
  for (const auto& k : cases)
    fk_err = std::max(fk_err, (kin::end_effector_position(cx.planar2, JointConfig{{k.q1, k.q2}}) - k.expect).norm());

  double jac_err = 0.0;
  Rng rng(17);
  for (const auto* chain : {&cx.planar2, &cx.arm7}) {
    for (int trial = 0; trial < kJacCases; ++trial) {
      const auto q = random_config(*chain, rng);
      const int link = std::uniform_int_distribution<int>(0, chain->dof() - 1)(rng);
      std::uniform_real_distribution<double> u(-0.2, 0.2);
      const Vec3 local(u(rng), u(rng), u(rng));
      const auto jac = kin::position_jacobian(*chain, q, link, local);
      for (int col = 0; col < chain->dof(); ++col) {
        JointConfig qp = q, qm = q;
        qp[col] += kJacStep;
        qm[col] -= kJacStep;
        const Vec3 fd = (kin::forward_kinematics(*chain, qp)[link].apply(local) -
                         kin::forward_kinematics(*chain, qm)[link].apply(local)) /
                        (2 * kJacStep);
        jac_err = std::max(jac_err, (fd - jac.col(col)).cwiseAbs().maxCoeff());
      }
    }
  }
  const double secs = seconds_since(t0);
  return {fk_err < kFkTol && jac_err < kJacTol && secs < kC1Seconds,
          fmt("fk max err %.3g m (< %.0e), jacobian max fd err %.3g (< %.0e) over %d cases per fixture, %.2fs", fk_err,
              kFkTol, jac_err, kJacTol, kJacCases, secs)};
}

Outcome ik_oracle(Context& cx) {
  const auto t0 = Clock::now();
  Rng rng(2024);
  const JointConfig mid = 0.5 * (cx.arm7.lower_limits() + cx.arm7.upper_limits());
  int ok = 0;
  for (int i = 0; i < kIkTargets; ++i) {
    const Vec3 target = kin::end_effector_position(cx.arm7, random_config(cx.arm7, rng));
    kin::DlsParams opts;
    opts.max_iters = kIkMaxIters;
    opts.tolerance = kIkTol;
    const auto r = kin::solve_ik_dls(cx.arm7, mid, target, opts);
    if (r.converged && r.residual < kIkTol && r.iterations <= kIkMaxIters) ++ok;
  }
  const double frac = static_cast<double>(ok) / kIkTargets;
  const double secs = seconds_since(t0);
  return {frac >= kIkConvergedFraction && secs < kC2Seconds,
          fmt("%d/%d arm7 targets converged from the mid-range pose to < %.0e m within %d iterations, %.1fs", ok, kIkTargets, kIkTol,
              kIkMaxIters, secs)};
}

Outcome label_soundness(Context& cx) {
  const auto t0 = Clock::now();
  data::CorpusParams p;
  p.pairs = kLabelPairs;
  p.seed = 21;
  const auto corpus = data::generate_corpus(cx.arm7, cx.arm7_skin, p);
  double worst = 0.0;
  std::size_t sound = 0;
  for (const auto& pair : corpus.pairs) {
    const double e = data::label_error(cx.arm7, cx.arm7_skin, pair);
    worst = std::max(worst, e);
    if (e < kLabelTol) ++sound;
  }
  const double secs = seconds_since(t0);
  return {sound == corpus.pairs.size() && corpus.pairs.size() == kLabelPairs && secs < kC3Seconds,
          fmt("%zu/%zu pairs sound, worst inf-norm %.3g m (< %.0e), %.1fs", sound, corpus.pairs.size(), worst,
              kLabelTol, secs)};
}

Outcome dataset_protocol(Context& cx) {
  const auto t0 = Clock::now();
  data::CorpusParams p;
  p.pairs = kProtocolPairs;
  p.seed = 7;
  const auto built = data::build_dataset(cx.arm7, cx.arm7_skin, p);
  const auto& ds = built.dataset;
  const std::size_t n = ds.size();
  const bool counts = ds.count(data::Split::train) == n * 98 / 100 && ds.count(data::Split::val) == n / 100 &&
                      ds.count(data::Split::test) == n - n * 98 / 100 - n / 100;
  const bool intervals = std::all_of(ds.interval.begin(), ds.interval.end(), [](auto k) { return k >= 10 && k <= 150; });

  const auto train = ds.indices(data::Split::train);
  const auto test = ds.indices(data::Split::test);
  struct Worst {
    double ks = 0.0;
    std::string where;
  };
  auto column_ks = [&](Worst& w, const std::string& name, std::size_t width, auto row) {
    for (std::size_t k = 0; k < width; ++k) {
      std::vector<double> a, b;
      a.reserve(train.size());
      for (auto r : train) a.push_back(row(r)[k]);
      for (auto r : test) b.push_back(row(r)[k]);
      const double d = stats::ks_statistic(std::move(a), std::move(b));
      if (d > w.ks) w = {d, name + "[" + std::to_string(k) + "]"};
    }
  };
  Worst labels, inputs;
  column_ks(labels, "dq", ds.dof(), [&](std::size_t r) { return ds.dq_row(r); });
  column_ks(inputs, "m0", ds.feature_dim(), [&](std::size_t r) { return ds.m0_row(r); });
  column_ks(inputs, "dm", ds.feature_dim(), [&](std::size_t r) { return ds.dm_row(r); });
  const double ks_max = std::max(labels.ks, inputs.ks);

  const auto again = data::build_dataset(cx.arm7, cx.arm7_skin, p);
  const bool identical = data::serialize_dataset(again.dataset) == data::serialize_dataset(ds);
  data::write_dataset(ds, (cx.work / "arm7_100k.mgd").string());
  data::write_sidecar(built.sidecar, data::sidecar_path((cx.work / "arm7_100k.mgd").string()));
  const double secs = seconds_since(t0);
  return {counts && intervals && ks_max < kKsMax && identical && secs < kC4Seconds,
          fmt("split %zu/%zu/%zu of %zu %s, intervals in [10,150] %s, max train/test KS %.4f at %s over m0/dm and "
              "%.4f at %s over dq (< %.2f), regeneration %s, %.1fs",
              ds.count(data::Split::train), ds.count(data::Split::val), ds.count(data::Split::test), n,
              counts ? "exact" : "WRONG", intervals ? "yes" : "NO", inputs.ks, inputs.where.c_str(), labels.ks,
              labels.where.c_str(), kKsMax, identical ? "byte-identical" : "DIFFERS", secs)};
}

// Runs the gradient probe built in double precision.
Outcome gradient_integrity(Context&) {
  const auto t0 = Clock::now();
#ifndef MG_GRADCHECK_PROBE
  return {false, "double-precision build disabled (MORPHOGUARD_BUILD_F64=OFF)"};
#else
  FILE* pipe = ::popen(MG_GRADCHECK_PROBE " 2>&1", "r");
  if (pipe == nullptr) return {false, "cannot start the gradient probe"};
  std::string text;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) text += buf;
  const int status = ::pclose(pipe);
  std::istringstream in(text);
  std::string key, precision;
  double step = 0.0, layers = -1.0, network = -1.0, mutation = -1.0;
  while (in >> key) {
    if (key == "precision") in >> precision >> key >> step;
    else if (key == "layers") in >> layers;
    else if (key == "network") in >> network;
    else if (key == "mutation") in >> mutation;
  }
  const double secs = seconds_since(t0);
  const bool ok = status == 0 && precision == "f64" && layers >= 0 && layers < kLayerGradTol && network >= 0 &&
                  network < kNetGradTol && mutation > kMutationMin && secs < kC5Seconds;
  return {ok, fmt("%s step %g: layers and blocks %.2g (< %g), networks (5 fusions, 8x64) %.2g (< %g), corrupted "
                  "backward %.2g (> %g), %.1fs",
                  precision.c_str(), step, layers, kLayerGradTol, network, kNetGradTol, mutation, kMutationMin, secs)};
#endif
}

Outcome desk_reproduction(Context& cx) {
  const auto t0 = Clock::now();
  const auto data_path = (cx.work / "arm7_100k.mgd").string();
  if (!fs::exists(data_path)) {
    data::CorpusParams p;
    p.pairs = kArmPairs;
    p.seed = 7;
    const auto built = data::build_dataset(cx.arm7, cx.arm7_skin, p);
    data::write_dataset(built.dataset, data_path);
    data::write_sidecar(built.sidecar, data::sidecar_path(data_path));
  }
  const auto ds = data::read_dataset(data_path);
  const auto sc = data::read_sidecar(data::sidecar_path(data_path));

  auto cfg = model::preset_config("small_5m", static_cast<int>(ds.feature_dim()), static_cast<int>(ds.dof()));
  cfg.fusion = model::FusionMethod::additive;
  cfg.seed = 1;
  model::MorphoGuardNet net(cfg);
  train::TrainConfig tc;
  tc.epochs = kC6Epochs;
  tc.seed = 1;
  const auto out_dir = (cx.work / "c6").string();
  const auto result = train::train(net, ds, tc, out_dir, [](const train::MetricsRow& m) {
    std::printf("  c6 epoch %d train %.5g val %.5g %.0fs\n", m.epoch, m.train_total, m.val_total, m.seconds);
    std::fflush(stdout);
  });
  const double train_secs = seconds_since(t0);
  cx.c6_checkpoint = out_dir + "/best.mgc";

  auto best = model::load_checkpoint(cx.c6_checkpoint);
  const auto rep = eval::contact_point_error(eval::net_predictor(*best), cx.arm7, cx.arm7_skin, ds, sc,
                                             ds.indices(data::Split::test));
  const double secs = seconds_since(t0);
  return {rep.contact.median < kMedianMax && rep.contact.p95 < kP95Max && train_secs < kC6Seconds,
          fmt("small_5m additive, %zu params, %d epochs (best %d), %zu test records: contact median %.4f m (< %.2f), "
              "p95 %.4f m (< %.2f); joint rmse %.4f rad = %.3f deg; %.1f min",
              net.parameter_count(), kC6Epochs, result.best_epoch, rep.samples, rep.contact.median, kMedianMax,
              rep.contact.p95, kP95Max, rep.joint.rmse_rad, rep.joint.rmse_deg, secs / 60)};
}

const data::Dataset& ci_corpus(Context& cx) {
  static const data::Dataset ds = [&] {
    data::CorpusParams p;
    p.pairs = kCiPairs;
    p.seed = 3;
    auto built = data::build_dataset(cx.planar2, cx.planar2_skin, p);
    data::write_dataset(built.dataset, (cx.work / "planar2_ci.mgd").string());
    return std::move(built.dataset);
  }();
  return ds;
}

void save_sweep(const eval::SweepOutput& out, const fs::path& dir) {
  fs::create_directories(dir);
  eval::write_sweep_csv((dir / "sweep.csv").string(), out);
  eval::write_curves_csv((dir / "curves.csv").string(), out);
  std::ofstream((dir / "sweep.md").string()) << eval::sweep_markdown(out);
}

Outcome fusion_sweep(Context& cx) {
  const auto t0 = Clock::now();
  const auto& ds = ci_corpus(cx);
  train::TrainConfig budget;
  budget.epochs = kSweepEpochs;
  const auto variants = eval::fusion_variants(static_cast<int>(ds.feature_dim()), static_cast<int>(ds.dof()), "ci_128");
  const auto out = eval::run_sweep(eval::SweepKind::fusion, variants, ds, budget, kSeeds, 1);
  save_sweep(out, cx.work / "c7");
  std::cout << eval::sweep_markdown(out);

  std::ostringstream os;
  bool all_converged = true;
  for (const auto& run : out.runs) {
    const double ratio = run.metrics.back().train_total / run.metrics.front().train_total;
    if (!(ratio < kConvergeRatio)) {
      all_converged = false;
      os << fmt("%s seed %llu ratio %.3g; ", run.variant.c_str(), static_cast<unsigned long long>(run.seed), ratio);
    }
  }
  std::ifstream csv((cx.work / "c7" / "sweep.csv").string());
  std::string header;
  std::getline(csv, header);
  const bool columns = header == eval::sweep_csv_header() && out.results.size() == 5;
  const auto md = eval::sweep_markdown(out);
  const bool table = md.rfind("| Fusion Method | Val Loss | Val Std | Rel Improvement (%) | p-value | Sig |", 0) == 0;

  const double t3 = std::round(stats::relative_improvement(0.0116, 0.0292) * 100) / 100;
  const double t4 = stats::relative_improvement(0.0321, 0.0159);
  const bool arithmetic = t3 == kTable3 && std::abs(t4 - kTable4) <= kTable4Tol;
  const double secs = seconds_since(t0);
  os << fmt("5 methods x %zu seeds x %d epochs on %zu planar2 pairs: %s; csv/table columns %s; "
            "relative_improvement %.2f%% and %.2f%%; %.1f min",
            kSeeds.size(), kSweepEpochs, ds.size(), all_converged ? "all converged" : "NOT all converged",
            columns && table ? "ok" : "WRONG", t3, t4, secs / 60);
  return {all_converged && columns && table && arithmetic && secs < kC7Seconds, os.str()};
}

Outcome scaling_property(Context& cx) {
  const auto t0 = Clock::now();
  const auto& ds = ci_corpus(cx);
  train::TrainConfig budget;
  budget.epochs = kScaleEpochs;
  const auto variants = eval::scale_variants(static_cast<int>(ds.feature_dim()), static_cast<int>(ds.dof()),
                                             {"ci_128", "micro_1m", "small_5m"});
  const auto out = eval::run_sweep(eval::SweepKind::scale, variants, ds, budget, kSeeds, 1);
  save_sweep(out, cx.work / "c8");
  std::cout << eval::sweep_markdown(out);
  const auto check = eval::scale_monotone_check(out.results);
  std::string detail = check.detail;
  std::replace(detail.begin(), detail.end(), '\n', ';');
  const double secs = seconds_since(t0);
  return {check.holds && secs < kC8Seconds,
          fmt("ci_128 < micro_1m < small_5m, %zu seeds x %d epochs: %s %.1f min", kSeeds.size(), kScaleEpochs,
              detail.c_str(), secs / 60)};
}

Outcome tracking(Context& cx) {
  const auto t0 = Clock::now();
  JointConfig qs(7), qg(7);
  qs << 0.3, 0.5, -0.4, 1.0, 0.2, -0.6, 0.1;
  qg << -0.8, 0.9, 0.6, 0.4, -0.5, 0.3, -0.7;
  const auto oracle =
      eval::tracking_benchmark(eval::oracle_tracking_predictor(), cx.arm7, cx.arm7_skin, qs, qg, kTrackSteps);
  const bool oracle_ok = oracle.max_point_error < kOracleTrackTol;

  std::string net_detail = "no checkpoint from the desk-scale run";
  bool net_ok = false;
  const auto ckpt = cx.c6_checkpoint.empty() ? (cx.work / "c6" / "best.mgc").string() : cx.c6_checkpoint;
  if (fs::exists(ckpt)) {
    auto net = model::load_checkpoint(ckpt);
    const auto res = eval::tracking_benchmark(eval::net_tracking_predictor(*net), cx.arm7, cx.arm7_skin, qs, qg,
                                              kTrackSteps);
    eval::write_tracking_csv((cx.work / "c9_tracking.csv").string(), res);
    net_ok = res.max_step_error < kNetTrackMax && res.non_exploding;
    net_detail = fmt("model max step error %.4f m (< %.2f), median %.4f, final %.4f, %s", res.max_step_error,
                     kNetTrackMax, res.median_step_error, res.final_step_error,
                     res.non_exploding ? "non-exploding" : "EXPLODING");

    // Reported only: paths between the endpoints of long test-split pairs.
    const auto data_path = (cx.work / "arm7_100k.mgd").string();
    if (fs::exists(data_path)) {
      const auto ds = data::read_dataset(data_path);
      const auto sc = data::read_sidecar(data::sidecar_path(data_path));
      double worst = 0.0;
      int used = 0, exploding = 0;
      for (auto r : ds.indices(data::Split::test)) {
        if (ds.interval[r] < kPairTrackMinInterval) continue;
        const auto q0 = sc.q0_row(r);
        JointConfig a(7), b(7);
        for (int j = 0; j < 7; ++j) {
          a[j] = q0[static_cast<std::size_t>(j)];
          b[j] = a[j] + ds.dq_row(r)[static_cast<std::size_t>(j)];
        }
        const auto t = eval::tracking_benchmark(eval::net_tracking_predictor(*net), cx.arm7, cx.arm7_skin, a, b,
                                                kTrackSteps);
        worst = std::max(worst, t.max_step_error);
        if (!t.non_exploding) ++exploding;
        if (++used == kPairTracks) break;
      }
      net_detail += fmt("; test-split pair paths (first %d with interval >= %d, not gated): worst max step error "
                        "%.4f m, %d exploding",
                        used, kPairTrackMinInterval, worst, exploding);
    }
  }
  const double secs = seconds_since(t0);
  return {oracle_ok && net_ok && secs < kC9Seconds,
          fmt("oracle max point error %.2g m (< %.0e) over %d steps; %s; %.1fs", oracle.max_point_error,
              kOracleTrackTol, kTrackSteps, net_detail.c_str(), secs)};
}

double t_tail_by_integration(double t, double dof) {
  const double c = std::exp(std::lgamma((dof + 1) / 2) - std::lgamma(dof / 2)) / std::sqrt(dof * kPi);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / dof, -(dof + 1) / 2); };
  const double b = std::abs(t);
  const int n = 200000;
  const double h = b / n;
  double s = pdf(0) + pdf(b);
  for (int i = 1; i < n; ++i) s += (i % 2 == 1 ? 4 : 2) * pdf(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

Outcome statistics(Context&) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < kWelchCases; ++trial) {
    const int na = std::uniform_int_distribution<int>(2, 12)(rng), nb = std::uniform_int_distribution<int>(2, 12)(rng);
    std::normal_distribution<double> da(0.0, 0.5 + trial * 0.1), db(0.3 * (trial % 4), 1.0);
    std::vector<double> a(na), b(nb);
    for (auto& x : a) x = da(rng);
    for (auto& x : b) x = db(rng);
    const auto r = stats::welch_t_test(a, b);
    worst = std::max(worst, std::abs(r.p_value - t_tail_by_integration(r.t, r.dof)));
  }
  const std::vector<double> same{0.4, 0.5, 0.45, 0.42};
  const double p_same = stats::welch_t_test(same, same).p_value;
  const double secs = seconds_since(t0);
  return {worst < kWelchTol && p_same == 1.0 && secs < kC10Seconds,
          fmt("max |p - integrated p| %.2g over %d cases (< %.0e), identical samples p = %.17g, %.2fs", worst,
              kWelchCases, kWelchTol, p_same, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  app.add_option("--work-dir", work, "Scratch directory for corpora, checkpoints and sweep tables");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  Context cx;
  cx.work = work;
  fs::create_directories(cx.work);
  cx.planar2 = kin::load_robot(std::string(MG_DATA_DIR) + "/planar2.robot");
  cx.planar2_skin = morph::load_skin(std::string(MG_DATA_DIR) + "/planar2.skin");
  cx.arm7 = kin::load_robot(std::string(MG_DATA_DIR) + "/arm7.robot");
  cx.arm7_skin = morph::load_skin(std::string(MG_DATA_DIR) + "/arm7.skin");
  std::printf("kernels %s, work dir %s\n", simd::active().name, fs::absolute(cx.work).c_str());

  const std::vector<std::pair<const char*, std::function<Outcome(Context&)>>> criteria{
      {"kinematics exactness", kinematics_exactness},
      {"IK oracle", ik_oracle},
      {"label soundness", label_soundness},
      {"dataset protocol", dataset_protocol},
      {"gradient integrity", gradient_integrity},
      {"desk-scale error regime", desk_reproduction},
      {"fusion sweep", fusion_sweep},
      {"scaling property", scaling_property},
      {"tracking benchmark", tracking},
      {"statistics", statistics},
  };
  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(cx);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
