#include "morphoguard/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "morphoguard/checksum.hpp"
#include "morphoguard/common.hpp"

namespace morphoguard::report {

namespace fs = std::filesystem;

namespace {

nlohmann::json digest_list(const std::vector<std::string>& paths, const fs::path& base) {
  auto arr = nlohmann::json::array();
  for (const auto& p : paths) {
    fs::path stored = fs::absolute(p).lexically_normal();
    const auto rel = fs::relative(stored, fs::absolute(base));
    if (!rel.empty() && *rel.begin() != "..") stored = rel;
    arr.push_back({{"path", stored.generic_string()}, {"sha256", file_sha256_hex(p)}});
  }
  return arr;
}

}  // namespace

std::string write_manifest(const std::string& dir, const RunManifest& m) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["tool"] = "morphoguard";
  j["version"] = MORPHOGUARD_VERSION;
  j["command"] = m.command;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  j["inputs"] = digest_list(m.inputs, dir);
  j["outputs"] = digest_list(m.outputs, dir);
  j["wall_seconds"] = m.wall_seconds;
  const auto path = (fs::path(dir) / "manifest.json").string();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw RuntimeFailure("write failed: " + path);
  return path;
}

ManifestCheck verify_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot read " + manifest_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(manifest_path + ": " + e.what());
  }
  ManifestCheck check;
  const fs::path base = fs::path(manifest_path).parent_path();
  for (const char* section : {"inputs", "outputs"}) {
    for (const auto& entry : j.value(section, nlohmann::json::array())) {
      fs::path p = entry.at("path").get<std::string>();
      if (p.is_relative() && fs::exists(base / p)) p = base / p;
      if (!fs::exists(p)) {
        check.problems.push_back(std::string(section) + ": missing " + p.string());
        continue;
      }
      if (file_sha256_hex(p.string()) != entry.at("sha256").get<std::string>())
        check.problems.push_back(std::string(section) + ": digest mismatch for " + p.string());
    }
  }
  check.ok = check.problems.empty();
  return check;
}

}  // namespace morphoguard::report
