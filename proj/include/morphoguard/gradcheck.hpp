#pragma once

#include <functional>
#include <string>
#include <vector>

#include "morphoguard/tensor.hpp"

namespace morphoguard::nn {

struct GradCheckOptions {
  int samples = 200;   // entries probed; all entries when fewer exist
  double step = 1e-3;  // central-difference half width
  std::uint64_t seed = 1;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst_entry;  // "name[index]"
};

/// Compares analytic gradients with central differences on a random subset of
/// entries. `loss` evaluates the objective; `loss_and_backward` evaluates it and
/// accumulates gradients into the (zeroed) parameters.
/// Relative error is |a − n| / max(|a|, |n|, 1e-6).
GradCheckResult gradient_check(const std::function<double()>& loss, const std::function<double()>& loss_and_backward,
                               const std::vector<Parameter*>& params, const GradCheckOptions& opts = {});

}  // namespace morphoguard::nn
