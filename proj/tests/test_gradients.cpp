#include <doctest.h>

#include <string>

#include "gradient_cases.hpp"

using namespace mgtest::grad;

TEST_CASE("affine gradient check") {
  const auto res = affine_case(kStep);
  MESSAGE("affine max rel err " << res.max_rel_error << " at " << res.worst_entry);
  CHECK(res.max_rel_error < 1e-4);
}

TEST_CASE("relu gradient check") {
  const auto res = relu_case(kStep);
  MESSAGE("relu max rel err " << res.max_rel_error << " at " << res.worst_entry);
  CHECK(res.max_rel_error < 1e-3);
}

TEST_CASE("layer norm gradient check") {
  const auto res = layer_norm_case(kStep);
  MESSAGE("layer norm max rel err " << res.max_rel_error << " at " << res.worst_entry);
  CHECK(res.max_rel_error < 1e-3);
}

TEST_CASE("residual block gradient checks") {
  for (auto m : {nn::Modulation::none, nn::Modulation::film, nn::Modulation::adaptive}) {
    for (std::uint64_t seed : {11, 12, 13}) {
      const auto res = block_case(m, kStep, seed);
      MESSAGE("modulation " << static_cast<int>(m) << " seed " << seed << " max rel err " << res.max_rel_error
                            << " at " << res.worst_entry);
      CHECK(res.max_rel_error < 1e-3);
    }
  }
}

TEST_CASE("full network gradient check for every fusion") {
  for (auto f : {model::FusionMethod::additive, model::FusionMethod::concat, model::FusionMethod::input_concat,
                 model::FusionMethod::parallel_branch, model::FusionMethod::adaptive_norm,
                 model::FusionMethod::outer_product}) {
    const std::string name(model::fusion_name(f));
    CAPTURE(name);
    const auto res = network_case(f, 2, 16, kStep);
    MESSAGE(name << " max rel err " << res.max_rel_error << " at " << res.worst_entry);
    CHECK(res.max_rel_error < 1e-2);
  }
}

TEST_CASE("8x64 network gradient check") {
  const auto res = network_case(model::FusionMethod::additive, 8, 64, kStep);
  MESSAGE("8x64 max rel err " << res.max_rel_error << " at " << res.worst_entry);
  CHECK(res.max_rel_error < 1e-2);
}

TEST_CASE("gradient checker detects a corrupted backward") {
  CHECK(mutation_case(kStep).max_rel_error > 0.1);
}
