#include "morphoguard/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "morphoguard/kvtext.hpp"

namespace morphoguard::data {

using kin::Vec3;

std::size_t Trajectory::segment_end(std::size_t step) const {
  auto it = std::upper_bound(segment_starts.begin(), segment_starts.end(), step);
  return it == segment_starts.end() ? size() : *it;
}

std::size_t Trajectory::longest_segment() const {
  std::size_t best = 0;
  for (std::size_t s = 0; s < segment_starts.size(); ++s) {
    const std::size_t end = s + 1 < segment_starts.size() ? segment_starts[s + 1] : size();
    best = std::max(best, end - segment_starts[s]);
  }
  return best;
}

IntervalMixture IntervalMixture::defaults() {
  IntervalMixture m;
  m.components = {{0.5, 35.0, 12.0}, {0.5, 100.0, 25.0}};
  return m;
}

IntervalMixture IntervalMixture::parse(std::string_view spec) {
  IntervalMixture m;
  std::string s(spec);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    MixtureComponent c;
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> c.weight >> c1 >> c.mean >> c2 >> c.stddev) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof())
      throw ConfigError("bad mixture component '" + item + "' (expected weight:mean:std)");
    m.components.push_back(c);
  }
  m.validate();
  return m;
}

std::string IntervalMixture::to_string() const {
  std::string out;
  for (const auto& c : components) {
    if (!out.empty()) out += ",";
    out += kv::format_number(c.weight) + ":" + kv::format_number(c.mean) + ":" + kv::format_number(c.stddev);
  }
  return out;
}

void IntervalMixture::validate() const {
  if (components.empty()) throw ConfigError("interval mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw ConfigError("interval mixture weights must be positive");
    if (!(c.stddev >= 0.0) || !std::isfinite(c.mean)) throw ConfigError("interval mixture needs finite mean and std >= 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("interval mixture weights must sum to 1 (got " + kv::format_number(total) + ")");
  if (lower < kMinInterval || upper > kMaxInterval || lower > upper)
    throw ConfigError("interval bounds must lie within [10, 150]");
}

std::vector<Vec3> resample_polyline(std::span<const Vec3> anchors, double spacing) {
  if (!(spacing > 0.0)) throw ConfigError("resample_polyline: spacing must be > 0");
  std::vector<Vec3> out;
  if (anchors.empty()) return out;
  std::vector<double> cumulative(anchors.size(), 0.0);
  for (std::size_t i = 1; i < anchors.size(); ++i)
    cumulative[i] = cumulative[i - 1] + (anchors[i] - anchors[i - 1]).norm();
  const double total = cumulative.back();
  const auto full_steps = static_cast<std::size_t>(std::floor(total / spacing + 1e-9));
  out.reserve(full_steps + 2);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= full_steps; ++k) {
    const double s = std::min(static_cast<double>(k) * spacing, total);
    while (seg + 2 < anchors.size() && cumulative[seg + 1] < s) ++seg;
    const double len = cumulative[seg + 1 < anchors.size() ? seg + 1 : seg] - cumulative[seg];
    if (anchors.size() == 1 || len <= 0.0) {
      out.push_back(anchors[std::min(seg + 1, anchors.size() - 1)]);
      continue;
    }
    const double t = std::clamp((s - cumulative[seg]) / len, 0.0, 1.0);
    out.push_back(anchors[seg] + t * (anchors[seg + 1] - anchors[seg]));
  }
  if (total - static_cast<double>(full_steps) * spacing > 1e-9 * spacing) out.push_back(anchors.back());
  return out;
}

std::vector<Vec3> generate_waypoints(const kin::KinematicChain& chain, int anchor_count, double spacing, Rng& rng,
                                     const WaypointOptions& options) {
  if (!(spacing > 0.0)) throw ConfigError("generate_waypoints: spacing must be > 0");
  if (anchor_count < 2) throw ConfigError("generate_waypoints: need at least 2 anchors");
  const double reach = chain.total_link_length();
  const double outer = options.reach_fraction * reach;
  const double inner = options.inner_fraction * reach;
  const Vec3 centre = kin::forward_kinematics(chain, kin::JointConfig::Zero(chain.dof())).front().translation;

  const kin::JointConfig lo = chain.lower_limits();
  const kin::JointConfig hi = chain.upper_limits();
  const kin::JointConfig mid = 0.5 * (lo + hi);
  const kin::JointConfig half = 0.5 * options.limit_fraction * (hi - lo);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  std::vector<Vec3> anchors;
  if (options.start) anchors.push_back(*options.start);
  long attempts = 0;
  while (static_cast<int>(anchors.size()) < anchor_count) {
    if (++attempts > 1000000) throw RuntimeFailure("generate_waypoints: no admissible anchor after 10^6 draws");
    kin::JointConfig q(chain.dof());
    for (int j = 0; j < chain.dof(); ++j) q[j] = mid[j] + half[j] * unit(rng);
    const Vec3 p = kin::end_effector_position(chain, q);
    const double r = (p - centre).norm();
    if (r > outer || r < inner) continue;
    // Segments leaving an anchor inside the inner ball are admitted.
    if (!anchors.empty() && (anchors.back() - centre).norm() >= inner) {
      const Vec3 a = anchors.back() - centre;
      const Vec3 d = p - anchors.back();
      const double t = std::clamp(-a.dot(d) / std::max(d.squaredNorm(), 1e-18), 0.0, 1.0);
      if ((a + t * d).norm() < inner) continue;
    }
    anchors.push_back(p);
  }
  return resample_polyline(anchors, spacing);
}

Trajectory traverse(const kin::KinematicChain& chain, const morph::SkinLayout& layout, const kin::JointConfig& q_start,
                    std::span<const Vec3> waypoints, double spacing, const kin::DlsParams& dls, TraverseStats* stats) {
  if (!chain.within_limits(q_start)) throw ConfigError("traverse: start configuration outside joint limits");
  layout.validate(chain);
  Trajectory traj;
  traj.chain = chain.name;
  TraverseStats local;
  kin::JointConfig q = q_start;
  const kin::JointConfig mid = 0.5 * (chain.lower_limits() + chain.upper_limits());
  Vec3 last_recorded = Vec3::Zero();
  for (const auto& w : waypoints) {
    ++local.waypoints;
    auto r = kin::solve_ik_dls(chain, q, w, dls);
    local.clamped_iterations += r.clamped_iterations;
    local.total_iterations += r.iterations;
    bool restarted = false;
    for (const auto* seed : {&mid, &q_start}) {
      if (r.converged) break;
      auto retry = kin::solve_ik_dls(chain, *seed, w, dls);
      local.total_iterations += retry.iterations;
      if (retry.converged) {
        r = std::move(retry);
        restarted = true;
        ++local.restarts;
      }
    }
    if (!r.converged) {
      q = r.q;
      ++local.failures;
      continue;
    }
    q = r.q;
    const Vec3 ee = kin::end_effector_position(chain, q);
    if (traj.size() == 0 || restarted || (ee - last_recorded).norm() > 2.0 * spacing)
      traj.segment_starts.push_back(traj.size());
    last_recorded = ee;
    traj.q.push_back(q);
    traj.morphology.push_back(morph::flatten(morph::compute_morphology(chain, layout, q)));
  }
  if (stats) *stats = local;
  if (local.waypoints > 0 && local.failures * 10 > local.waypoints) {
    std::ostringstream os;
    os << "traverse: " << local.failures << " of " << local.waypoints << " waypoints failed to converge "
       << "(limit 10%) on chain '" << chain.name << "'; clamped iterations " << local.clamped_iterations;
    throw RuntimeFailure(os.str());
  }
  return traj;
}

int sample_interval(const IntervalMixture& mix, Rng& rng) {
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  const double u = pick(rng);
  double acc = 0.0;
  const MixtureComponent* chosen = &mix.components.back();
  for (const auto& c : mix.components) {
    acc += c.weight;
    if (u < acc) {
      chosen = &c;
      break;
    }
  }
  double draw = chosen->mean;
  if (chosen->stddev > 0.0) draw = std::normal_distribution<double>(chosen->mean, chosen->stddev)(rng);
  const double rounded = std::round(draw);
  return static_cast<int>(std::clamp(rounded, static_cast<double>(mix.lower), static_cast<double>(mix.upper)));
}

std::vector<SamplePair> build_pairs(const Trajectory& traj, std::size_t count, const IntervalMixture& mix, Rng& rng) {
  mix.validate();
  if (traj.size() <= static_cast<std::size_t>(mix.upper) + 10 || traj.longest_segment() <= static_cast<std::size_t>(mix.upper))
    throw ConfigError("build_pairs: trajectory too short (" + std::to_string(traj.size()) + " steps, longest segment " +
                      std::to_string(traj.longest_segment()) + "; need > " + std::to_string(mix.upper + 10) + ")");
  std::uniform_int_distribution<std::size_t> pick(0, traj.size() - 1);
  std::vector<SamplePair> out;
  out.reserve(count);
  constexpr int kMaxRedraws = 100000;
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t i = 0;
    int k = 0;
    int attempts = 0;
    for (;; ++attempts) {
      if (attempts > kMaxRedraws) throw RuntimeFailure("build_pairs: could not place an interval inside a segment");
      i = pick(rng);
      k = sample_interval(mix, rng);
      if (i + static_cast<std::size_t>(k) < traj.segment_end(i)) break;
    }
    const std::size_t g = i + static_cast<std::size_t>(k);
    SamplePair p;
    p.m0 = traj.morphology[i];
    p.dm = traj.morphology[g] - traj.morphology[i];
    p.dq = traj.q[g] - traj.q[i];
    p.q0 = traj.q[i];
    p.interval = k;
    out.push_back(std::move(p));
  }
  return out;
}

double label_error(const kin::KinematicChain& chain, const morph::SkinLayout& layout, const SamplePair& pair) {
  const auto achieved = morph::flatten(morph::compute_morphology(chain, layout, pair.q0 + pair.dq));
  return (achieved - (pair.m0 + pair.dm)).cwiseAbs().maxCoeff();
}

std::string CorpusParams::describe() const {
  std::ostringstream os;
  os << "pairs=" << pairs << " spacing=" << kv::format_number(spacing) << " anchors=" << anchors_per_trajectory
     << " pairs_per_trajectory=" << pairs_per_trajectory << " mixture=" << mixture.to_string()
     << " dls_damping=" << kv::format_number(dls.damping) << " dls_step_cap=" << kv::format_number(dls.step_cap)
     << " dls_tol=" << kv::format_number(dls.tolerance) << " dls_max_iters=" << dls.max_iters << " seed=" << seed;
  return os.str();
}

namespace {

struct TrajectoryOutput {
  std::vector<SamplePair> pairs;
  TraverseStats stats;
  int steps = 0;
  int segments = 0;
};

TrajectoryOutput run_trajectory(const kin::KinematicChain& chain, const morph::SkinLayout& layout,
                                const CorpusParams& params, std::size_t index, std::size_t pair_count) {
  constexpr int kMaxAttempts = 20;
  const kin::JointConfig lo = chain.lower_limits();
  const kin::JointConfig hi = chain.upper_limits();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng = make_rng(params.seed, "trajectory", index * kMaxAttempts + static_cast<std::size_t>(attempt));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    kin::JointConfig q_start(chain.dof());
    for (int j = 0; j < chain.dof(); ++j)
      q_start[j] = 0.5 * (lo[j] + hi[j]) + 0.5 * params.waypoints.limit_fraction * (hi[j] - lo[j]) * unit(rng);
    WaypointOptions wp = params.waypoints;
    wp.start = kin::end_effector_position(chain, q_start);
    const auto waypoints = generate_waypoints(chain, params.anchors_per_trajectory, params.spacing, rng, wp);
    TrajectoryOutput out;
    const auto traj = traverse(chain, layout, q_start, waypoints, params.spacing, params.dls, &out.stats);
    if (traj.longest_segment() <= static_cast<std::size_t>(params.mixture.upper) ||
        traj.size() <= static_cast<std::size_t>(params.mixture.upper) + 10)
      continue;
    Rng pair_rng = make_rng(params.seed, "pairs", index);
    out.pairs = build_pairs(traj, pair_count, params.mixture, pair_rng);
    out.steps = static_cast<int>(traj.size());
    out.segments = static_cast<int>(traj.segment_starts.size());
    return out;
  }
  throw RuntimeFailure("generate_corpus: trajectory " + std::to_string(index) + " stayed too short after " +
                       std::to_string(kMaxAttempts) + " attempts; increase anchors_per_trajectory");
}

}  // namespace

Corpus generate_corpus(const kin::KinematicChain& chain, const morph::SkinLayout& layout, const CorpusParams& params) {
  params.mixture.validate();
  layout.validate(chain);
  if (params.pairs_per_trajectory == 0) throw ConfigError("pairs_per_trajectory must be > 0");
  const std::size_t n_traj = (params.pairs + params.pairs_per_trajectory - 1) / params.pairs_per_trajectory;
  std::vector<std::size_t> counts(n_traj, params.pairs / std::max<std::size_t>(n_traj, 1));
  for (std::size_t t = 0; t < params.pairs % std::max<std::size_t>(n_traj, 1); ++t) ++counts[t];

  std::vector<TrajectoryOutput> outputs(n_traj);
  std::vector<std::exception_ptr> errors(n_traj);
  const int jobs = std::max(1, std::min<int>(params.jobs, static_cast<int>(n_traj)));
  auto worker = [&](int w) {
    for (std::size_t t = static_cast<std::size_t>(w); t < n_traj; t += static_cast<std::size_t>(jobs)) {
      try {
        outputs[t] = run_trajectory(chain, layout, params, t, counts[t]);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  if (jobs == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> threads;
    for (int w = 0; w < jobs; ++w) threads.emplace_back(worker, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Corpus corpus;
  corpus.pairs.reserve(params.pairs);
  corpus.stats.trajectories = static_cast<int>(n_traj);
  for (auto& o : outputs) {
    corpus.stats.steps += o.steps;
    corpus.stats.segments += o.segments;
    corpus.stats.traverse.waypoints += o.stats.waypoints;
    corpus.stats.traverse.failures += o.stats.failures;
    corpus.stats.traverse.clamped_iterations += o.stats.clamped_iterations;
    corpus.stats.traverse.restarts += o.stats.restarts;
    corpus.stats.traverse.total_iterations += o.stats.total_iterations;
    for (auto& p : o.pairs) corpus.pairs.push_back(std::move(p));
  }
  return corpus;
}

}  // namespace morphoguard::data
