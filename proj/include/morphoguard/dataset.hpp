#pragma once

// In-memory training corpus and its on-disk forms: the MGD1 record file and the
// MGQ1 sidecar carrying start configurations plus the robot/skin descriptions.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "morphoguard/checksum.hpp"
#include "morphoguard/common.hpp"
#include "morphoguard/datagen.hpp"

namespace morphoguard::data {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

const char* split_name(Split s);
Split parse_split(std::string_view name);

struct DatasetHeader {
  std::uint32_t version = 1;
  std::uint32_t dof = 0;     // n
  std::uint32_t points = 0;  // M
  std::uint64_t master_seed = 0;
  Sha256Digest layout_digest{};
};

/// Columns of 32-bit records. Row r of m0/dm has 3M entries, of dq has n.
struct Dataset {
  DatasetHeader header;
  std::vector<float> m0;
  std::vector<float> dm;
  std::vector<float> dq;
  std::vector<std::uint16_t> interval;
  std::vector<std::uint8_t> split;

  std::size_t size() const { return interval.size(); }
  std::size_t feature_dim() const { return 3u * header.points; }
  std::size_t dof() const { return header.dof; }

  std::span<const float> m0_row(std::size_t r) const { return {m0.data() + r * feature_dim(), feature_dim()}; }
  std::span<const float> dm_row(std::size_t r) const { return {dm.data() + r * feature_dim(), feature_dim()}; }
  std::span<const float> dq_row(std::size_t r) const { return {dq.data() + r * dof(), dof()}; }

  /// Record indices tagged with `s`, ascending.
  std::vector<std::size_t> indices(Split s) const;
  std::size_t count(Split s) const;
  /// Throws ConfigError on inconsistent column sizes or out-of-range tags/intervals.
  void validate() const;

  bool operator==(const Dataset& other) const;
};

/// SHA-256 of the canonical robot and skin texts.
Sha256Digest layout_digest(const kin::KinematicChain& chain, const morph::SkinLayout& layout);

/// Quantizes pairs to 32-bit records (all tagged train until split).
Dataset make_dataset(std::span<const SamplePair> pairs, const kin::KinematicChain& chain, const morph::SkinLayout& layout,
                     std::uint64_t master_seed);

struct SplitFractions {
  double train = 0.98;
  double val = 0.01;
  double test = 0.01;
};

/// Uniform permutation, then contiguous assignment: ⌊train·N⌋, ⌊val·N⌋, rest.
/// Throws ConfigError for N < 100 or fractions not summing to 1.
void split_dataset(Dataset& ds, Rng& rng, const SplitFractions& fractions = {});

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);
std::vector<std::uint8_t> serialize_dataset(const Dataset& ds);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");

/// Replay data for evaluation: start configuration of every record and the
/// descriptions needed to rebuild the kinematics.
struct Sidecar {
  std::string chain_name;
  std::string robot_text;
  std::string skin_text;
  std::string creation_params;
  std::uint32_t dof = 0;
  std::vector<double> q0;  // size × dof

  std::size_t size() const { return dof == 0 ? 0 : q0.size() / dof; }
  std::span<const double> q0_row(std::size_t r) const { return {q0.data() + r * dof, dof}; }
};

Sidecar make_sidecar(std::span<const SamplePair> pairs, const kin::KinematicChain& chain,
                     const morph::SkinLayout& layout, std::string creation_params);
void write_sidecar(const Sidecar& sc, const std::string& path);
Sidecar read_sidecar(const std::string& path);
/// Path convention: "<dataset>.q0".
std::string sidecar_path(const std::string& dataset_path);

struct BuiltDataset {
  Dataset dataset;
  Sidecar sidecar;
  CorpusStats stats;
};

/// Full generation pipeline: corpus, 32-bit records, seeded 98/1/1 split and
/// the replay sidecar. Deterministic in params.seed.
BuiltDataset build_dataset(const kin::KinematicChain& chain, const morph::SkinLayout& layout,
                           const CorpusParams& params);

}  // namespace morphoguard::data
