#pragma once

// manifest.json written next to every CLI output: command, resolved
// configuration, seeds and SHA-256 digests of inputs and outputs.

#include <map>
#include <string>
#include <vector>

namespace morphoguard::report {

struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;   // paths, digested on write
  std::vector<std::string> outputs;  // paths, digested on write
  double wall_seconds = 0;
};

/// Writes <dir>/manifest.json and returns its path. Output paths inside `dir`
/// are stored relative to it.
std::string write_manifest(const std::string& dir, const RunManifest& m);

struct ManifestCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

/// Recomputes every recorded digest.
ManifestCheck verify_manifest(const std::string& manifest_path);

}  // namespace morphoguard::report
