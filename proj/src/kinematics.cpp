#include "morphoguard/kinematics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "morphoguard/common.hpp"
#include "morphoguard/kvtext.hpp"

namespace morphoguard::kin {

namespace {

constexpr double kUnitTol = 1e-9;

Vec3 to_vec3(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }

void check_dims(const KinematicChain& chain, const JointConfig& q) {
  if (q.size() != chain.dof()) {
    std::ostringstream os;
    os << "chain '" << chain.name << "': configuration has " << q.size() << " entries, chain dof is "
       << chain.dof();
    throw ConfigError(os.str());
  }
}

JointSpec parse_joint(const kv::Table& t, int index) {
  JointSpec j;
  j.parent = static_cast<int>(t.integer("parent"));
  const Vec3 xyz = t.has("origin_xyz") ? to_vec3(t.array("origin_xyz", 3)) : Vec3::Zero();
  const Vec3 rpy = t.has("origin_rpy") ? to_vec3(t.array("origin_rpy", 3)) : Vec3::Zero();
  j.origin = RigidTransform::from_xyz_rpy(xyz, rpy);
  j.axis = to_vec3(t.array("axis", 3));
  const auto lim = t.array("limits", 2);
  j.lower = lim[0];
  j.upper = lim[1];
  // Re-throw invariant failures with file/line context.
  if (std::abs(j.axis.norm() - 1.0) > kUnitTol) t.fail("axis", "axis not unit (norm " + kv::format_number(j.axis.norm()) + ")");
  if (!(j.lower < j.upper)) t.fail("limits", "lower limit must be < upper limit");
  if (j.lower < -2 * kPi || j.upper > 2 * kPi) t.fail("limits", "limits must lie within [-2pi, 2pi]");
  if (j.parent < -1 || j.parent >= index)
    t.fail("parent", "parent index must be -1 or an earlier joint (joint " + std::to_string(index) + ")");
  return j;
}

void fill_chain_header(KinematicChain& c, const kv::Table& t) {
  c.name = t.text("name");
  c.end_effector_offset = t.has("end_effector_offset") ? to_vec3(t.array("end_effector_offset", 3)) : Vec3::Zero();
  const Vec3 xyz = t.has("base_xyz") ? to_vec3(t.array("base_xyz", 3)) : Vec3::Zero();
  const Vec3 rpy = t.has("base_rpy") ? to_vec3(t.array("base_rpy", 3)) : Vec3::Zero();
  c.base = RigidTransform::from_xyz_rpy(xyz, rpy);
}

void write_vec(std::ostringstream& os, const char* key, const Vec3& v) {
  os << key << " = " << kv::format_array({v.x(), v.y(), v.z()}) << "\n";
}

// Inverse of from_xyz_rpy for the rotation part (URDF fixed-axis convention).
Vec3 rotation_to_rpy(const Mat3& r) {
  const double pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  const double roll = std::atan2(r(2, 1), r(2, 2));
  const double yaw = std::atan2(r(1, 0), r(0, 0));
  return {roll, pitch, yaw};
}

}  // namespace

RigidTransform RigidTransform::from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  RigidTransform t;
  t.rotation = (Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()))
                   .toRotationMatrix();
  if (rpy.isZero(0.0)) t.rotation = Mat3::Identity();
  t.translation = xyz;
  return t;
}

RigidTransform RigidTransform::rotation_about(const Vec3& unit_axis, double angle) {
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
  return t;
}

double KinematicChain::total_link_length() const {
  double len = 0.0;
  for (const auto& j : joints) len += j.origin.translation.norm();
  return len + end_effector_offset.norm();
}

void KinematicChain::validate() const {
  auto fail = [&](int i, const std::string& what) {
    throw ConfigError("chain '" + name + "' joint " + std::to_string(i) + ": " + what);
  };
  if (joints.empty()) throw ConfigError("chain '" + name + "': dof must be >= 1");
  for (int i = 0; i < dof(); ++i) {
    const auto& j = joints[static_cast<std::size_t>(i)];
    if (std::abs(j.axis.norm() - 1.0) > kUnitTol) fail(i, "axis not unit");
    if (!(j.lower < j.upper)) fail(i, "lower limit must be < upper limit");
    if (j.lower < -2 * kPi || j.upper > 2 * kPi) fail(i, "limits must lie within [-2pi, 2pi]");
    if (j.parent < -1 || j.parent >= i) fail(i, "parent index must precede the joint");
    if (j.origin.orthonormality_error() > 1e-9 || std::abs(j.origin.rotation.determinant() - 1.0) > 1e-9)
      fail(i, "origin rotation not orthonormal");
  }
}

bool KinematicChain::moves(int ancestor, int link) const {
  for (int k = link; k >= 0; k = joints[static_cast<std::size_t>(k)].parent)
    if (k == ancestor) return true;
  return false;
}

JointConfig KinematicChain::clamp(const JointConfig& q) const {
  check_dims(*this, q);
  return q.cwiseMax(lower_limits()).cwiseMin(upper_limits());
}

bool KinematicChain::within_limits(const JointConfig& q) const {
  check_dims(*this, q);
  return (q.array() >= lower_limits().array()).all() && (q.array() <= upper_limits().array()).all();
}

JointConfig KinematicChain::lower_limits() const {
  JointConfig lo(dof());
  for (int i = 0; i < dof(); ++i) lo[i] = joints[static_cast<std::size_t>(i)].lower;
  return lo;
}

JointConfig KinematicChain::upper_limits() const {
  JointConfig hi(dof());
  for (int i = 0; i < dof(); ++i) hi[i] = joints[static_cast<std::size_t>(i)].upper;
  return hi;
}

const KinematicChain* ChainSet::find(std::string_view chain_name) const {
  for (const auto& c : chains)
    if (c.name == chain_name) return &c;
  return nullptr;
}

const KinematicChain& ChainSet::at(std::string_view chain_name) const {
  if (const auto* c = find(chain_name)) return *c;
  throw ConfigError("robot '" + name + "' has no chain named '" + std::string(chain_name) + "'");
}

ChainSet parse_robot_set(std::string_view text, std::string_view source) {
  const auto doc = kv::parse(text, source);
  ChainSet set;
  set.name = doc.root.text("name");

  bool explicit_chains = false;
  for (const auto& s : doc.sections) {
    if (s.name() == "chain") {
      explicit_chains = true;
    } else if (s.name() != "joint") {
      throw ConfigError(std::string(source) + ":" + std::to_string(s.line()) + ": unknown section [" + s.name() + "]");
    }
  }

  if (!explicit_chains) {
    KinematicChain c;
    fill_chain_header(c, doc.root);
    set.chains.push_back(std::move(c));
  } else if (doc.root.has("end_effector_offset")) {
    doc.root.fail("end_effector_offset", "must be given per [chain] when [chain] sections are used");
  }

  for (const auto& s : doc.sections) {
    if (s.name() == "chain") {
      KinematicChain c;
      fill_chain_header(c, s);
      if (set.find(c.name) != nullptr) s.fail("name", "duplicate chain name");
      set.chains.push_back(std::move(c));
      continue;
    }
    if (set.chains.empty())
      throw ConfigError(std::string(source) + ":" + std::to_string(s.line()) + ": [joint] before any [chain]");
    auto& chain = set.chains.back();
    chain.joints.push_back(parse_joint(s, chain.dof()));
  }
  for (const auto& c : set.chains) c.validate();
  return set;
}

ChainSet load_robot_set(const std::string& path) { return parse_robot_set(kv::read_text_file(path), path); }

KinematicChain parse_robot(std::string_view text, std::string_view source) {
  auto set = parse_robot_set(text, source);
  if (set.chains.size() != 1)
    throw ConfigError(std::string(source) + ": expected a single chain, found " + std::to_string(set.chains.size()));
  return std::move(set.chains.front());
}

KinematicChain load_robot(const std::string& path) { return parse_robot(kv::read_text_file(path), path); }

std::string to_text(const ChainSet& set) {
  std::ostringstream os;
  os << "name = \"" << set.name << "\"\n";
  for (const auto& c : set.chains) {
    os << "\n[chain]\nname = \"" << c.name << "\"\n";
    write_vec(os, "base_xyz", c.base.translation);
    write_vec(os, "base_rpy", rotation_to_rpy(c.base.rotation));
    write_vec(os, "end_effector_offset", c.end_effector_offset);
    for (const auto& j : c.joints) {
      os << "\n[joint]\nparent = " << j.parent << "\n";
      write_vec(os, "origin_xyz", j.origin.translation);
      write_vec(os, "origin_rpy", rotation_to_rpy(j.origin.rotation));
      write_vec(os, "axis", j.axis);
      os << "limits = " << kv::format_array({j.lower, j.upper}) << "\n";
    }
  }
  return os.str();
}

std::vector<RigidTransform> forward_kinematics(const KinematicChain& chain, const JointConfig& q) {
  check_dims(chain, q);
  std::vector<RigidTransform> frames(static_cast<std::size_t>(chain.dof()));
  for (int i = 0; i < chain.dof(); ++i) {
    const auto& j = chain.joints[static_cast<std::size_t>(i)];
    const RigidTransform& parent = j.parent < 0 ? chain.base : frames[static_cast<std::size_t>(j.parent)];
    frames[static_cast<std::size_t>(i)] = parent * j.origin * RigidTransform::rotation_about(j.axis, q[i]);
  }
  return frames;
}

Vec3 end_effector_position(const KinematicChain& chain, const JointConfig& q) {
  return forward_kinematics(chain, q).back().apply(chain.end_effector_offset);
}

PositionJacobian position_jacobian(const KinematicChain& chain, const std::vector<RigidTransform>& frames,
                                   int link_index, const Vec3& local_point) {
  if (link_index < 0 || link_index >= chain.dof())
    throw ConfigError("link index " + std::to_string(link_index) + " out of range for chain '" + chain.name +
                      "' with dof " + std::to_string(chain.dof()));
  const auto& link = frames[static_cast<std::size_t>(link_index)];
  const Vec3 p = link.apply(local_point);
  PositionJacobian jac = PositionJacobian::Zero(3, chain.dof());
  for (int j = 0; j <= link_index; ++j) {
    if (!chain.moves(j, link_index)) continue;
    const auto& f = frames[static_cast<std::size_t>(j)];
    const Vec3 omega = f.rotation * chain.joints[static_cast<std::size_t>(j)].axis;
    jac.col(j) = omega.cross(p - f.translation);
  }
  return jac;
}

PositionJacobian position_jacobian(const KinematicChain& chain, const JointConfig& q, int link_index,
                                   const Vec3& local_point) {
  return position_jacobian(chain, forward_kinematics(chain, q), link_index, local_point);
}

IkResult solve_ik_dls(const KinematicChain& chain, const JointConfig& q_init, const Vec3& target,
                      const DlsParams& params) {
  check_dims(chain, q_init);
  const int last = chain.dof() - 1;
  const double lambda2 = params.damping * params.damping;

  IkResult best;
  JointConfig q = chain.clamp(q_init);
  IkResult out;
  out.q = q;
  out.residual = std::numeric_limits<double>::infinity();

  for (int it = 0;; ++it) {
    const auto frames = forward_kinematics(chain, q);
    const Vec3 err = target - frames.back().apply(chain.end_effector_offset);
    const double residual = err.norm();
    if (residual < out.residual) {
      out.q = q;
      out.residual = residual;
    }
    if (residual <= params.tolerance) {
      out.q = q;
      out.residual = residual;
      out.iterations = it;
      out.converged = true;
      return out;
    }
    if (it >= params.max_iters) {
      out.iterations = it;
      return out;
    }

    auto jac = position_jacobian(chain, frames, last, chain.end_effector_offset);
    const JointConfig lo = chain.lower_limits();
    const JointConfig hi = chain.upper_limits();
    JointConfig dq;
    for (int pass = 0;; ++pass) {
      const Mat3 system = jac * jac.transpose() + lambda2 * Mat3::Identity();
      Vec3 w;
      if (lambda2 == 0.0) {
        Eigen::FullPivLU<Mat3> lu(system);
        if (lu.rank() < 3) throw RuntimeFailure("solve_ik_dls: singular 3x3 system with zero damping");
        w = lu.solve(err);
      } else {
        w = system.ldlt().solve(err);
      }
      dq = jac.transpose() * w;
      bool frozen = false;
      for (int j = 0; j <= last && pass <= last; ++j) {
        const bool blocked = (q[j] <= lo[j] && dq[j] < 0.0) || (q[j] >= hi[j] && dq[j] > 0.0);
        if (blocked && !jac.col(j).isZero()) {
          jac.col(j).setZero();
          frozen = true;
        }
      }
      if (!frozen) break;
    }
    const double norm = dq.norm();
    if (norm > params.step_cap) dq *= params.step_cap / norm;
    const JointConfig next = q + dq;
    q = chain.clamp(next);
    if (q != next) ++out.clamped_iterations;
  }
}

std::vector<JointConfig> interpolate_configs(const JointConfig& q0, const JointConfig& qg, int steps) {
  if (q0.size() != qg.size())
    throw ConfigError("interpolate_configs: dimension mismatch (" + std::to_string(q0.size()) + " vs " +
                      std::to_string(qg.size()) + ")");
  if (steps < 2) throw ConfigError("interpolate_configs: steps must be >= 2");
  std::vector<JointConfig> path;
  path.reserve(static_cast<std::size_t>(steps));
  const JointConfig delta = qg - q0;
  for (int k = 0; k < steps; ++k) {
    if (k == 0) {
      path.push_back(q0);
    } else if (k == steps - 1) {
      path.push_back(qg);
    } else {
      const double s = static_cast<double>(k) / (steps - 1);
      const double h = s * s * (3.0 - 2.0 * s);
      path.push_back(q0 + delta * h);
    }
  }
  return path;
}

}  // namespace morphoguard::kin
