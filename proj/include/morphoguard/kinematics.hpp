#pragma once

// Serial-chain revolute robots: description loading, forward kinematics,
// positional Jacobians and a damped-least-squares IK solver.

#include <Eigen/Dense>
#include <string>
#include <string_view>
#include <vector>

#include "morphoguard/common.hpp"

namespace morphoguard::kin {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using JointConfig = Eigen::VectorXd;  // radians, one entry per joint
using PositionJacobian = Eigen::Matrix<double, 3, Eigen::Dynamic>;

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_xyz_rpy(const Vec3& xyz, const Vec3& rpy);
  static RigidTransform rotation_about(const Vec3& unit_axis, double angle);

  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  /// Frobenius distance of RᵀR from identity.
  double orthonormality_error() const { return (rotation.transpose() * rotation - Mat3::Identity()).norm(); }
};

struct JointSpec {
  int parent = -1;          // -1 attaches to the chain base
  RigidTransform origin;    // parent joint frame -> this joint frame at zero angle
  Vec3 axis = Vec3::UnitZ();
  double lower = -kPi;
  double upper = kPi;
};

struct KinematicChain {
  std::string name;
  RigidTransform base;  // world -> chain base
  std::vector<JointSpec> joints;
  Vec3 end_effector_offset = Vec3::Zero();  // in the last joint frame

  int dof() const { return static_cast<int>(joints.size()); }
  /// Sum of joint-to-joint distances plus the end-effector offset length.
  double total_link_length() const;
  /// Throws ConfigError naming the joint and the violated invariant.
  void validate() const;
  /// True if joint `ancestor` moves the frame of joint `link` (ancestor == link counts).
  bool moves(int ancestor, int link) const;
  JointConfig clamp(const JointConfig& q) const;
  bool within_limits(const JointConfig& q) const;
  JointConfig lower_limits() const;
  JointConfig upper_limits() const;
};

/// Named collection of chains sharing one world frame (e.g. a dual-arm robot).
struct ChainSet {
  std::string name;
  std::vector<KinematicChain> chains;

  const KinematicChain& at(std::string_view chain_name) const;
  const KinematicChain* find(std::string_view chain_name) const;
};

ChainSet parse_robot_set(std::string_view text, std::string_view source = "<robot>");
ChainSet load_robot_set(const std::string& path);
/// Loads a description holding exactly one chain.
KinematicChain load_robot(const std::string& path);
KinematicChain parse_robot(std::string_view text, std::string_view source = "<robot>");
/// Canonical text form. Re-parsing reproduces the set (bit-exact for axis-aligned origins).
std::string to_text(const ChainSet& set);

/// World-frame transform of every joint frame at configuration q.
std::vector<RigidTransform> forward_kinematics(const KinematicChain& chain, const JointConfig& q);
Vec3 end_effector_position(const KinematicChain& chain, const JointConfig& q);

/// ∂p/∂q for a point rigidly attached to joint `link_index`'s frame; 3×dof.
PositionJacobian position_jacobian(const KinematicChain& chain, const JointConfig& q, int link_index,
                                   const Vec3& local_point);
PositionJacobian position_jacobian(const KinematicChain& chain, const std::vector<RigidTransform>& frames,
                                   int link_index, const Vec3& local_point);

struct DlsParams {
  double damping = 0.05;   // λ in Jᵀ(JJᵀ + λ²I)⁻¹e
  double step_cap = 0.1;   // max ‖Δq‖ per iteration, radians
  double tolerance = 1e-4; // meters
  int max_iters = 500;
};

struct IkResult {
  JointConfig q;
  double residual = 0.0;   // meters
  int iterations = 0;
  int clamped_iterations = 0;
  bool converged = false;
};

/// Position-only IK for the end effector. Never throws on non-convergence:
/// returns the best configuration seen with converged == false.
IkResult solve_ik_dls(const KinematicChain& chain, const JointConfig& q_init, const Vec3& target,
                      const DlsParams& params = {});

/// Smoothstep path q0 + (qg − q0)(3s² − 2s³) at `steps` uniform s in [0, 1].
/// First and last entries equal q0 and qg exactly.
std::vector<JointConfig> interpolate_configs(const JointConfig& q0, const JointConfig& qg, int steps);

}  // namespace morphoguard::kin
