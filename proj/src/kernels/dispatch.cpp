#include <atomic>
#include <cstdlib>
#include <string_view>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::simd {

#ifndef MORPHOGUARD_WITH_AVX2
const KernelSet* avx2_kernels() { return nullptr; }
#endif

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const KernelSet* detect() {
  const char* env = std::getenv("MORPHO_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return &scalar_kernels();
  if (avx2_kernels() != nullptr && cpu_supports_avx2()) return avx2_kernels();
  return &scalar_kernels();
}

std::atomic<const KernelSet*>& current() {
  static std::atomic<const KernelSet*> set{detect()};
  return set;
}

}  // namespace

const KernelSet& active() { return *current().load(std::memory_order_relaxed); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&scalar_kernels());
    return true;
  }
  if (name == "avx2" && avx2_kernels() != nullptr && cpu_supports_avx2()) {
    current().store(avx2_kernels());
    return true;
  }
  return false;
}

}  // namespace morphoguard::simd
