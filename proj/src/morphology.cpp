#include "morphoguard/morphology.hpp"

#include <sstream>

#include "morphoguard/kvtext.hpp"

namespace morphoguard::morph {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

void check_unit(const SkinUnit& u, std::size_t index, const kin::KinematicChain& chain) {
  if (u.parent_joint < 0 || u.parent_joint >= chain.dof())
    throw ConfigError("skin unit " + std::to_string(index) + ": joint " + std::to_string(u.parent_joint) +
                      " out of range for chain '" + chain.name + "' (dof " + std::to_string(chain.dof()) + ")");
}

}  // namespace

SkinLayout::SkinLayout(std::vector<SkinUnit> units) : units_(std::move(units)) {
  if (units_.empty()) throw ConfigError("skin layout must contain at least one unit");
  fingerprint_ = fnv1a(to_text(*this));
}

void SkinLayout::validate(const kin::ChainSet& robot) const {
  for (std::size_t i = 0; i < units_.size(); ++i) {
    const auto* chain = robot.find(units_[i].chain);
    if (chain == nullptr)
      throw ConfigError("skin unit " + std::to_string(i) + ": robot '" + robot.name + "' has no chain '" +
                        units_[i].chain + "'");
    check_unit(units_[i], i, *chain);
  }
}

void SkinLayout::validate(const kin::KinematicChain& chain) const {
  for (std::size_t i = 0; i < units_.size(); ++i) {
    if (units_[i].chain != chain.name)
      throw ConfigError("skin unit " + std::to_string(i) + " references chain '" + units_[i].chain +
                        "', expected '" + chain.name + "'");
    check_unit(units_[i], i, chain);
  }
}

SkinLayout parse_skin(std::string_view text, std::string_view source) {
  const auto doc = kv::parse(text, source);
  std::vector<SkinUnit> units;
  for (const auto& s : doc.sections) {
    if (s.name() != "unit")
      throw ConfigError(std::string(source) + ":" + std::to_string(s.line()) + ": unknown section [" + s.name() + "]");
    SkinUnit u;
    u.chain = s.text("chain");
    u.parent_joint = static_cast<int>(s.integer("joint"));
    const auto off = s.array("offset_xyz", 3);
    u.local_offset = kin::Vec3(off[0], off[1], off[2]);
    units.push_back(std::move(u));
  }
  if (units.empty()) throw ConfigError(std::string(source) + ": no [unit] sections");
  return SkinLayout(std::move(units));
}

SkinLayout load_skin(const std::string& path) { return parse_skin(kv::read_text_file(path), path); }

std::string to_text(const SkinLayout& layout) {
  std::ostringstream os;
  for (const auto& u : layout.units()) {
    os << "[unit]\nchain = \"" << u.chain << "\"\njoint = " << u.parent_joint << "\noffset_xyz = "
       << kv::format_array({u.local_offset.x(), u.local_offset.y(), u.local_offset.z()}) << "\n";
  }
  return os.str();
}

Morphology compute_morphology(const kin::ChainSet& robot, const SkinLayout& layout, const ConfigMap& q) {
  layout.validate(robot);
  std::map<std::string, std::vector<kin::RigidTransform>, std::less<>> frames;
  for (const auto& chain : robot.chains) {
    auto it = q.find(chain.name);
    if (it == q.end()) continue;
    frames.emplace(chain.name, kin::forward_kinematics(chain, it->second));
  }
  Morphology m;
  m.layout_id = layout.fingerprint();
  m.positions.resize(layout.count(), 3);
  for (int i = 0; i < layout.count(); ++i) {
    const auto& u = layout.units()[static_cast<std::size_t>(i)];
    auto it = frames.find(u.chain);
    if (it == frames.end()) throw ConfigError("compute_morphology: no configuration for chain '" + u.chain + "'");
    m.positions.row(i) = it->second[static_cast<std::size_t>(u.parent_joint)].apply(u.local_offset).transpose();
  }
  return m;
}

Morphology compute_morphology(const kin::KinematicChain& chain, const SkinLayout& layout, const kin::JointConfig& q) {
  layout.validate(chain);
  const auto frames = kin::forward_kinematics(chain, q);
  Morphology m;
  m.layout_id = layout.fingerprint();
  m.positions.resize(layout.count(), 3);
  for (int i = 0; i < layout.count(); ++i) {
    const auto& u = layout.units()[static_cast<std::size_t>(i)];
    m.positions.row(i) = frames[static_cast<std::size_t>(u.parent_joint)].apply(u.local_offset).transpose();
  }
  return m;
}

Positions morphology_delta(const Morphology& goal, const Morphology& current) {
  if (goal.layout_id != current.layout_id || goal.count() != current.count())
    throw ConfigError("morphology_delta: morphologies come from different layouts");
  return goal.positions - current.positions;
}

Eigen::VectorXd flatten(const Positions& p) {
  Eigen::VectorXd v(p.rows() * 3);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (int c = 0; c < 3; ++c) v[i * 3 + c] = p(i, c);
  return v;
}

Eigen::VectorXd flatten(const Morphology& m) { return flatten(m.positions); }

Morphology unflatten(const Eigen::VectorXd& v, std::uint64_t layout_id) {
  if (v.size() % 3 != 0) throw ConfigError("unflatten: length " + std::to_string(v.size()) + " is not a multiple of 3");
  Morphology m;
  m.layout_id = layout_id;
  m.positions.resize(v.size() / 3, 3);
  for (Eigen::Index i = 0; i < m.positions.rows(); ++i)
    for (int c = 0; c < 3; ++c) m.positions(i, c) = v[i * 3 + c];
  return m;
}

NoisySample add_observation_noise(std::span<const float> clean, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("add_observation_noise: sigma must be >= 0");
  NoisySample s;
  s.sigma = sigma;
  s.vector.assign(clean.begin(), clean.end());
  s.noise.assign(clean.size(), 0.0);
  if (sigma == 0.0) return s;
  std::normal_distribution<double> normal(0.0, sigma);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const float noisy = static_cast<float>(static_cast<double>(clean[i]) + normal(rng));
    s.vector[i] = noisy;
    // Difference of two floats is exact in double.
    s.noise[i] = static_cast<double>(noisy) - static_cast<double>(clean[i]);
  }
  return s;
}

}  // namespace morphoguard::morph
