#pragma once

// MGC1 checkpoints: magic, u32 version, length-prefixed model config text, then
// per tensor [u32 name length][name][u32 rows][u32 cols][f32 data], sealed by CRC-64.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "morphoguard/model.hpp"

namespace morphoguard::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const MorphoGuardNet& net);
std::unique_ptr<MorphoGuardNet> deserialize_checkpoint(std::span<const std::uint8_t> bytes,
                                                       const std::string& source = "<memory>");

void save_checkpoint(const MorphoGuardNet& net, const std::string& path);
std::unique_ptr<MorphoGuardNet> load_checkpoint(const std::string& path);
/// Rejects a checkpoint whose embedded architecture differs from `expected`
/// (seed and loss weights are not compared).
std::unique_ptr<MorphoGuardNet> load_checkpoint(const std::string& path, const ModelConfig& expected);

}  // namespace morphoguard::model
