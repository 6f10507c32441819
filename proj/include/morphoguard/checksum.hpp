#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

namespace morphoguard {

/// CRC-64/XZ (ECMA-182 polynomial, reflected, init/xorout all ones).
std::uint64_t crc64(std::span<const std::uint8_t> bytes);

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> bytes);
Sha256Digest sha256(const std::string& text);
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Hex SHA-256 of a file's bytes; throws ConfigError if unreadable.
std::string file_sha256_hex(const std::string& path);

}  // namespace morphoguard
