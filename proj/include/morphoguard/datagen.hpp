#pragma once

// Data collection protocol: random workspace paths at fixed spacing, IK traversal
// into joint/morphology trajectories, and relative-motion pair sampling.

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "morphoguard/common.hpp"
#include "morphoguard/kinematics.hpp"
#include "morphoguard/morphology.hpp"

namespace morphoguard::data {

inline constexpr int kMinInterval = 10;
inline constexpr int kMaxInterval = 150;

struct Trajectory {
  std::string chain;
  std::vector<kin::JointConfig> q;
  std::vector<Eigen::VectorXd> morphology;  // flattened, one per step
  /// First step index of each contiguous segment. A new segment starts when
  /// skipped waypoints would leave a gap wider than twice the path spacing.
  std::vector<std::size_t> segment_starts;

  std::size_t size() const { return q.size(); }
  /// One past the last step of the segment containing `step`.
  std::size_t segment_end(std::size_t step) const;
  std::size_t longest_segment() const;
};

struct TraverseStats {
  int waypoints = 0;
  int failures = 0;
  int restarts = 0;  // warm start failed, a mid-range or start-config solve converged
  int clamped_iterations = 0;
  int total_iterations = 0;
};

struct SamplePair {
  Eigen::VectorXd m0;  // flattened current morphology
  Eigen::VectorXd dm;  // flattened goal − current morphology
  Eigen::VectorXd dq;  // joint motion label, radians
  int interval = 0;    // steps between current and goal
  Eigen::VectorXd q0;  // current configuration; kept in the sidecar, not the record
};

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct IntervalMixture {
  std::vector<MixtureComponent> components;
  int lower = kMinInterval;
  int upper = kMaxInterval;

  /// Two equal-weight components N(35, 12²) and N(100, 25²).
  static IntervalMixture defaults();
  /// "w:mean:std,w:mean:std,..."
  static IntervalMixture parse(std::string_view spec);
  std::string to_string() const;
  void validate() const;
};

/// Points along the polyline through `anchors` at exactly `spacing` arc length
/// apart; the final step may be shorter so the last anchor is included.
std::vector<kin::Vec3> resample_polyline(std::span<const kin::Vec3> anchors, double spacing);

struct WaypointOptions {
  double reach_fraction = 0.95;     // outer radius of the sampling ball, × total link length
  double inner_fraction = 0.25;     // anchors, or segments passing, closer than this to the base are resampled
  double limit_fraction = 0.9;      // anchor configs drawn from this fraction of each joint range
  std::optional<kin::Vec3> start;   // first anchor, e.g. the current end-effector position
};

/// `anchor_count` random reachable anchors joined by straight segments and
/// resampled at `spacing`.
std::vector<kin::Vec3> generate_waypoints(const kin::KinematicChain& chain, int anchor_count, double spacing,
                                          Rng& rng, const WaypointOptions& options = {});

/// One warm-started DLS solve per waypoint; converged solves become steps. A
/// failed warm start is retried from the mid-range and start configurations,
/// and a converged retry opens a new segment.
/// Throws RuntimeFailure if more than 10% of waypoints fail.
Trajectory traverse(const kin::KinematicChain& chain, const morph::SkinLayout& layout, const kin::JointConfig& q_start,
                    std::span<const kin::Vec3> waypoints, double spacing, const kin::DlsParams& dls = {},
                    TraverseStats* stats = nullptr);

int sample_interval(const IntervalMixture& mix, Rng& rng);

/// `count` pairs drawn within segments of `traj`.
std::vector<SamplePair> build_pairs(const Trajectory& traj, std::size_t count, const IntervalMixture& mix, Rng& rng);

/// ‖flatten(morphology(q0 + dq)) − (m0 + dm)‖∞ in meters.
double label_error(const kin::KinematicChain& chain, const morph::SkinLayout& layout, const SamplePair& pair);

struct CorpusParams {
  std::size_t pairs = 100000;
  double spacing = 0.002;
  int anchors_per_trajectory = 6;
  std::size_t pairs_per_trajectory = 1000;
  IntervalMixture mixture = IntervalMixture::defaults();
  kin::DlsParams dls;
  WaypointOptions waypoints;
  std::uint64_t seed = 1;
  int jobs = 1;

  std::string describe() const;
};

struct CorpusStats {
  int trajectories = 0;
  int steps = 0;
  int segments = 0;
  TraverseStats traverse;
};

struct Corpus {
  std::vector<SamplePair> pairs;  // trajectory-index order
  CorpusStats stats;
};

/// Independent seeded trajectories (optionally on `jobs` threads), merged in
/// trajectory order so the output does not depend on the worker count.
Corpus generate_corpus(const kin::KinematicChain& chain, const morph::SkinLayout& layout, const CorpusParams& params);

}  // namespace morphoguard::data
