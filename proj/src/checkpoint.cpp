#include "morphoguard/checkpoint.hpp"

#include <sstream>

#include "morphoguard/binary_io.hpp"

namespace morphoguard::model {

namespace {

bool same_architecture(ModelConfig a, ModelConfig b) {
  a.seed = b.seed = 0;
  a.lambda_m = b.lambda_m = 0;
  a.lambda_g = b.lambda_g = 0;
  a.noise_sigma = b.noise_sigma = 0;
  a.preset = b.preset = "";
  return a == b;
}

// Checkpoints always store float32 values.
[[maybe_unused]] void put_values(io::ByteWriter& w, const std::vector<float>& v) { w.put_array(std::span<const float>(v)); }
[[maybe_unused]] void put_values(io::ByteWriter& w, const std::vector<double>& v) {
  const std::vector<float> narrow(v.begin(), v.end());
  w.put_array(std::span<const float>(narrow));
}
[[maybe_unused]] void get_values(io::ByteReader& r, std::vector<float>& v) { r.get_array(std::span<float>(v)); }
[[maybe_unused]] void get_values(io::ByteReader& r, std::vector<double>& v) {
  std::vector<float> narrow(v.size());
  r.get_array(std::span<float>(narrow));
  v.assign(narrow.begin(), narrow.end());
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const MorphoGuardNet& net) {
  io::ByteWriter w;
  w.put_raw("MGC1");
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put_string(to_text(net.config()));
  for (const nn::Parameter* p : net.tensors()) {
    w.put_string(p->name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p->value.rows));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p->value.cols));
    put_values(w, p->value.data);
  }
  w.seal();
  return std::move(w.bytes());
}

std::unique_ptr<MorphoGuardNet> deserialize_checkpoint(std::span<const std::uint8_t> bytes, const std::string& source) {
  io::ByteReader r(bytes, source);
  r.verify_seal();
  r.expect_magic("MGC1");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    r.fail("unsupported checkpoint version " + std::to_string(version));
  const auto cfg = parse_model_config(r.get_string(), source + " (embedded config)");
  auto net = std::make_unique<MorphoGuardNet>(cfg);
  auto tensors = net->tensors();
  std::size_t i = 0;
  while (r.remaining() > 0) {
    const auto name = r.get_string(4096);
    if (i >= tensors.size()) r.fail("unexpected tensor '" + name + "'");
    nn::Parameter* p = tensors[i++];
    if (name != p->name) r.fail("expected tensor '" + p->name + "', found '" + name + "'");
    const auto rows = r.get<std::uint32_t>();
    const auto cols = r.get<std::uint32_t>();
    if (static_cast<int>(rows) != p->value.rows || static_cast<int>(cols) != p->value.cols) {
      std::ostringstream os;
      os << "tensor '" << name << "' is " << rows << "x" << cols << ", config implies " << p->value.rows << "x"
         << p->value.cols;
      r.fail(os.str());
    }
    get_values(r, p->value.data);
  }
  if (i != tensors.size()) r.fail("checkpoint is missing tensor '" + tensors[i]->name + "'");
  return net;
}

void save_checkpoint(const MorphoGuardNet& net, const std::string& path) {
  io::write_file_bytes(path, serialize_checkpoint(net));
}

std::unique_ptr<MorphoGuardNet> load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(io::read_file_bytes(path), path);
}

std::unique_ptr<MorphoGuardNet> load_checkpoint(const std::string& path, const ModelConfig& expected) {
  auto net = load_checkpoint(path);
  if (!same_architecture(net->config(), expected))
    throw ConfigError(path + ": checkpoint architecture (" + net->config().preset + ", " +
                      fusion_name(net->config().fusion) + ") does not match the requested " + expected.preset + ", " +
                      fusion_name(expected.fusion));
  return net;
}

}  // namespace morphoguard::model
