#pragma once

#include <span>

#include "morphoguard/tensor.hpp"

namespace morphoguard::nn {

struct AdamOptions {
  real beta1 = 0.9f;
  real beta2 = 0.999f;
  real eps = 1e-8f;
};

/// One bias-corrected Adam step on every trainable parameter; zeroes the grads.
void adam_step(std::span<Parameter* const> params, real lr, const AdamOptions& opts = {});

/// Cosine decay from lr_max at step 0 to lr_min at step total.
double cosine_lr(double lr_max, double lr_min, long step, long total);

}  // namespace morphoguard::nn
