#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace morphoguard {

/// Invalid input, configuration or file content. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation that could not complete (non-convergence, non-finite values, I/O).
/// The CLI maps this to exit code 1.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

/// Scalar type of the tensor engine. MORPHOGUARD_F64 selects double precision,
/// used to tighten gradient checks.
#ifdef MORPHOGUARD_F64
using real = double;
#else
using real = float;
#endif

/// Stable 64-bit seed for a sub-task. Same (master, tag, index) always yields the
/// same value, independent of thread count or call order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view tag, std::uint64_t index = 0) {
  return Rng(derive_seed(master, tag, index));
}

constexpr double kPi = 3.14159265358979323846;

inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace morphoguard
