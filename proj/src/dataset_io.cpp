#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>

#include "morphoguard/binary_io.hpp"
#include "morphoguard/dataset.hpp"

namespace morphoguard {

namespace io {

void ByteWriter::seal() { put<std::uint64_t>(crc64(bytes_)); }

void ByteReader::fail(const std::string& what) const { throw ConfigError(source_ + ": " + what); }

void ByteReader::verify_seal() {
  if (bytes_.size() < pos_ + 8) fail("truncated file (no checksum)");
  const auto body = bytes_.first(bytes_.size() - 8);
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes_.data() + body.size(), 8);
  if (crc64(body) != stored) fail("checksum mismatch (file corrupted)");
  bytes_ = body;
}

void ByteReader::expect_magic(std::string_view magic) {
  if (remaining() < magic.size() || std::memcmp(bytes_.data() + pos_, magic.data(), magic.size()) != 0)
    fail("bad magic (expected \"" + std::string(magic) + "\")");
  pos_ += magic.size();
}

std::string ByteReader::get_string(std::size_t max_len) {
  const auto len = get<std::uint32_t>();
  if (len > max_len) fail("string length " + std::to_string(len) + " exceeds limit");
  const auto* p = take(len);
  return std::string(reinterpret_cast<const char*>(p), len);
}

const std::uint8_t* ByteReader::take(std::size_t n) {
  if (n > remaining()) fail("truncated file");
  const auto* p = bytes_.data() + pos_;
  pos_ += n;
  return p;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("write to '" + path + "' failed");
}

}  // namespace io

namespace data {

namespace {

constexpr std::string_view kDatasetMagic = "MGD1";
constexpr std::string_view kSidecarMagic = "MGQ1";
constexpr std::uint32_t kSidecarVersion = 1;

}  // namespace

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "' (expected train|val|test)");
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < size(); ++r)
    if (split[r] == static_cast<std::uint8_t>(s)) out.push_back(r);
  return out;
}

std::size_t Dataset::count(Split s) const {
  return static_cast<std::size_t>(std::count(split.begin(), split.end(), static_cast<std::uint8_t>(s)));
}

void Dataset::validate() const {
  const std::size_t n = size();
  if (m0.size() != n * feature_dim() || dm.size() != n * feature_dim() || dq.size() != n * dof() || split.size() != n)
    throw ConfigError("dataset columns disagree with record count " + std::to_string(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (interval[r] < kMinInterval || interval[r] > kMaxInterval)
      throw ConfigError("record " + std::to_string(r) + ": interval " + std::to_string(interval[r]) + " outside [10, 150]");
    if (split[r] > 2) throw ConfigError("record " + std::to_string(r) + ": bad split tag");
  }
}

bool Dataset::operator==(const Dataset& o) const {
  return header.version == o.header.version && header.dof == o.header.dof && header.points == o.header.points &&
         header.master_seed == o.header.master_seed && header.layout_digest == o.header.layout_digest && m0 == o.m0 &&
         dm == o.dm && dq == o.dq && interval == o.interval && split == o.split;
}

Sha256Digest layout_digest(const kin::KinematicChain& chain, const morph::SkinLayout& layout) {
  kin::ChainSet set{chain.name, {chain}};
  return sha256(kin::to_text(set) + "\n" + morph::to_text(layout));
}

Dataset make_dataset(std::span<const SamplePair> pairs, const kin::KinematicChain& chain,
                     const morph::SkinLayout& layout, std::uint64_t master_seed) {
  Dataset ds;
  ds.header.dof = static_cast<std::uint32_t>(chain.dof());
  ds.header.points = static_cast<std::uint32_t>(layout.count());
  ds.header.master_seed = master_seed;
  ds.header.layout_digest = layout_digest(chain, layout);
  const std::size_t f = ds.feature_dim();
  ds.m0.reserve(pairs.size() * f);
  ds.dm.reserve(pairs.size() * f);
  ds.dq.reserve(pairs.size() * ds.dof());
  for (const auto& p : pairs) {
    if (static_cast<std::size_t>(p.m0.size()) != f || static_cast<std::size_t>(p.dm.size()) != f ||
        static_cast<std::size_t>(p.dq.size()) != ds.dof())
      throw ConfigError("make_dataset: pair dimensions do not match chain/layout");
    for (double v : p.m0) ds.m0.push_back(static_cast<float>(v));
    for (double v : p.dm) ds.dm.push_back(static_cast<float>(v));
    for (double v : p.dq) ds.dq.push_back(static_cast<float>(v));
    ds.interval.push_back(static_cast<std::uint16_t>(p.interval));
    ds.split.push_back(static_cast<std::uint8_t>(Split::train));
  }
  ds.validate();
  return ds;
}

void split_dataset(Dataset& ds, Rng& rng, const SplitFractions& fractions) {
  const std::size_t n = ds.size();
  if (n < 100) throw ConfigError("split_dataset: need at least 100 records, have " + std::to_string(n));
  if (fractions.train < 0 || fractions.val < 0 || fractions.test < 0 ||
      std::abs(fractions.train + fractions.val + fractions.test - 1.0) > 1e-9)
    throw ConfigError("split_dataset: fractions must be non-negative and sum to 1");
  auto floor_count = [n](double f) {
    // Exact for percentages: N * (100 f) / 100 in integers.
    const double pct = f * 100.0;
    if (std::abs(pct - std::round(pct)) < 1e-9) return n * static_cast<std::size_t>(std::llround(pct)) / 100;
    return static_cast<std::size_t>(std::floor(f * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_train = floor_count(fractions.train);
  const std::size_t n_val = floor_count(fractions.val);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates with an explicit uniform draw so the permutation is fixed by the seed alone.
  for (std::size_t i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i);
    std::swap(perm[i], perm[pick(rng)]);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const Split s = k < n_train ? Split::train : (k < n_train + n_val ? Split::val : Split::test);
    ds.split[perm[k]] = static_cast<std::uint8_t>(s);
  }
}

std::vector<std::uint8_t> serialize_dataset(const Dataset& ds) {
  ds.validate();
  io::ByteWriter w;
  w.put_raw(kDatasetMagic);
  w.put<std::uint32_t>(ds.header.version);
  w.put<std::uint32_t>(ds.header.dof);
  w.put<std::uint32_t>(ds.header.points);
  w.put<std::uint64_t>(ds.size());
  w.put<std::uint64_t>(ds.header.master_seed);
  w.put_array(std::span<const std::uint8_t>(ds.header.layout_digest));
  for (std::size_t r = 0; r < ds.size(); ++r) {
    w.put_array(ds.m0_row(r));
    w.put_array(ds.dm_row(r));
    w.put_array(ds.dq_row(r));
    w.put<std::uint16_t>(ds.interval[r]);
    w.put<std::uint8_t>(ds.split[r]);
  }
  w.seal();
  return std::move(w.bytes());
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  r.expect_magic(kDatasetMagic);
  r.verify_seal();
  Dataset ds;
  ds.header.version = r.get<std::uint32_t>();
  if (ds.header.version != 1) r.fail("unsupported dataset version " + std::to_string(ds.header.version));
  ds.header.dof = r.get<std::uint32_t>();
  ds.header.points = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  ds.header.master_seed = r.get<std::uint64_t>();
  r.get_array(std::span<std::uint8_t>(ds.header.layout_digest));
  const std::size_t f = ds.feature_dim();
  const std::size_t record_bytes = (2 * f + ds.dof()) * sizeof(float) + 3;
  if (count > r.remaining() / std::max<std::size_t>(record_bytes, 1) || r.remaining() != count * record_bytes)
    r.fail("record count " + std::to_string(count) + " disagrees with payload size");
  const auto n = static_cast<std::size_t>(count);
  ds.m0.resize(n * f);
  ds.dm.resize(n * f);
  ds.dq.resize(n * ds.dof());
  ds.interval.resize(n);
  ds.split.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.get_array(std::span<float>(ds.m0.data() + i * f, f));
    r.get_array(std::span<float>(ds.dm.data() + i * f, f));
    r.get_array(std::span<float>(ds.dq.data() + i * ds.dof(), ds.dof()));
    ds.interval[i] = r.get<std::uint16_t>();
    ds.split[i] = r.get<std::uint8_t>();
  }
  ds.validate();
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) { io::write_file_bytes(path, serialize_dataset(ds)); }

Dataset read_dataset(const std::string& path) { return deserialize_dataset(io::read_file_bytes(path), path); }

Sidecar make_sidecar(std::span<const SamplePair> pairs, const kin::KinematicChain& chain,
                     const morph::SkinLayout& layout, std::string creation_params) {
  Sidecar sc;
  sc.chain_name = chain.name;
  sc.robot_text = kin::to_text(kin::ChainSet{chain.name, {chain}});
  sc.skin_text = morph::to_text(layout);
  sc.creation_params = std::move(creation_params);
  sc.dof = static_cast<std::uint32_t>(chain.dof());
  sc.q0.reserve(pairs.size() * sc.dof);
  for (const auto& p : pairs) {
    if (p.q0.size() != chain.dof()) throw ConfigError("make_sidecar: pair without a start configuration");
    for (double v : p.q0) sc.q0.push_back(v);
  }
  return sc;
}

void write_sidecar(const Sidecar& sc, const std::string& path) {
  io::ByteWriter w;
  w.put_raw(kSidecarMagic);
  w.put<std::uint32_t>(kSidecarVersion);
  w.put_string(sc.chain_name);
  w.put_string(sc.robot_text);
  w.put_string(sc.skin_text);
  w.put_string(sc.creation_params);
  w.put<std::uint32_t>(sc.dof);
  w.put<std::uint64_t>(sc.size());
  w.put_array(std::span<const double>(sc.q0));
  w.seal();
  io::write_file_bytes(path, w.bytes());
}

Sidecar read_sidecar(const std::string& path) {
  const auto bytes = io::read_file_bytes(path);
  io::ByteReader r(bytes, path);
  r.expect_magic(kSidecarMagic);
  r.verify_seal();
  if (r.get<std::uint32_t>() != kSidecarVersion) r.fail("unsupported sidecar version");
  Sidecar sc;
  sc.chain_name = r.get_string();
  sc.robot_text = r.get_string();
  sc.skin_text = r.get_string();
  sc.creation_params = r.get_string();
  sc.dof = r.get<std::uint32_t>();
  const auto count = r.get<std::uint64_t>();
  if (sc.dof == 0 || r.remaining() != count * sc.dof * sizeof(double)) r.fail("sidecar payload size mismatch");
  sc.q0.resize(static_cast<std::size_t>(count) * sc.dof);
  r.get_array(std::span<double>(sc.q0));
  return sc;
}

std::string sidecar_path(const std::string& dataset_path) { return dataset_path + ".q0"; }

BuiltDataset build_dataset(const kin::KinematicChain& chain, const morph::SkinLayout& layout,
                           const CorpusParams& params) {
  auto corpus = generate_corpus(chain, layout, params);
  BuiltDataset out;
  out.stats = corpus.stats;
  out.dataset = make_dataset(corpus.pairs, chain, layout, params.seed);
  Rng split_rng = make_rng(params.seed, "split");
  split_dataset(out.dataset, split_rng);
  out.sidecar = make_sidecar(corpus.pairs, chain, layout, params.describe());
  return out;
}

}  // namespace data
}  // namespace morphoguard
