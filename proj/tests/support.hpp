#pragma once

#include <filesystem>
#include <string>
#include <unistd.h>

#include "morphoguard/dataset.hpp"
#include "morphoguard/kinematics.hpp"
#include "morphoguard/morphology.hpp"

namespace mgtest {

inline std::string data_path(const std::string& name) { return std::string(MG_DATA_DIR) + "/" + name; }

inline const morphoguard::kin::KinematicChain& planar2() {
  static const auto chain = morphoguard::kin::load_robot(data_path("planar2.robot"));
  return chain;
}
inline const morphoguard::morph::SkinLayout& planar2_skin() {
  static const auto layout = morphoguard::morph::load_skin(data_path("planar2.skin"));
  return layout;
}
inline const morphoguard::kin::KinematicChain& arm7() {
  static const auto chain = morphoguard::kin::load_robot(data_path("arm7.robot"));
  return chain;
}
inline const morphoguard::morph::SkinLayout& arm7_skin() {
  static const auto layout = morphoguard::morph::load_skin(data_path("arm7.skin"));
  return layout;
}

inline morphoguard::kin::JointConfig random_config(const morphoguard::kin::KinematicChain& chain,
                                                   morphoguard::Rng& rng) {
  morphoguard::kin::JointConfig q(chain.dof());
  for (int j = 0; j < chain.dof(); ++j) {
    std::uniform_real_distribution<double> u(chain.joints[j].lower, chain.joints[j].upper);
    q[j] = u(rng);
  }
  return q;
}

/// Small seeded planar2 dataset shared by the model, training and evaluation tests.
inline const morphoguard::data::BuiltDataset& planar2_corpus(std::size_t pairs = 2000) {
  static const auto built = [pairs] {
    morphoguard::data::CorpusParams p;
    p.pairs = pairs;
    p.pairs_per_trajectory = 500;
    p.seed = 11;
    return morphoguard::data::build_dataset(planar2(), planar2_skin(), p);
  }();
  return built;
}

/// Fresh per-test scratch directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("mg_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace mgtest
