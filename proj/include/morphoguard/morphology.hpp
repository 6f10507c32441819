#pragma once

// Material-point (skin unit) layouts bound to chain links, and the discrete
// robot morphology they induce at a joint configuration.

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "morphoguard/common.hpp"
#include "morphoguard/kinematics.hpp"

namespace morphoguard::morph {

struct SkinUnit {
  std::string chain;
  int parent_joint = 0;
  kin::Vec3 local_offset = kin::Vec3::Zero();  // in the parent joint frame, meters
};

/// Ordered, immutable set of material points. Row i of every morphology computed
/// with this layout belongs to units()[i].
class SkinLayout {
 public:
  SkinLayout() = default;
  explicit SkinLayout(std::vector<SkinUnit> units);

  const std::vector<SkinUnit>& units() const { return units_; }
  int count() const { return static_cast<int>(units_.size()); }
  /// Identity of the layout contents (hash of the canonical text).
  std::uint64_t fingerprint() const { return fingerprint_; }

  /// Throws ConfigError if a unit names a missing chain or joint.
  void validate(const kin::ChainSet& robot) const;
  void validate(const kin::KinematicChain& chain) const;

 private:
  std::vector<SkinUnit> units_;
  std::uint64_t fingerprint_ = 0;
};

SkinLayout parse_skin(std::string_view text, std::string_view source = "<skin>");
SkinLayout load_skin(const std::string& path);
std::string to_text(const SkinLayout& layout);

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct Morphology {
  Positions positions;          // M×3, world frame, meters
  std::uint64_t layout_id = 0;  // SkinLayout::fingerprint() of the producing layout

  int count() const { return static_cast<int>(positions.rows()); }
};

using ConfigMap = std::map<std::string, kin::JointConfig, std::less<>>;

Morphology compute_morphology(const kin::ChainSet& robot, const SkinLayout& layout, const ConfigMap& q);
/// Single-chain form; every unit must reference `chain`.
Morphology compute_morphology(const kin::KinematicChain& chain, const SkinLayout& layout, const kin::JointConfig& q);

/// M_goal − M_current, row by row.
Positions morphology_delta(const Morphology& goal, const Morphology& current);

/// Row-major (x0, y0, z0, x1, ...).
Eigen::VectorXd flatten(const Morphology& m);
Morphology unflatten(const Eigen::VectorXd& v, std::uint64_t layout_id);
Eigen::VectorXd flatten(const Positions& p);

/// Observation with additive Gaussian noise. `vector` is in training precision;
/// `noise` holds the realized perturbation exactly, so vector − noise recovers
/// the clean input bit for bit.
struct NoisySample {
  std::vector<float> vector;
  std::vector<double> noise;
  double sigma = 0.0;
};

NoisySample add_observation_noise(std::span<const float> clean, double sigma, Rng& rng);

}  // namespace morphoguard::morph
