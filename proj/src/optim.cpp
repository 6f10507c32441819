#include "morphoguard/optim.hpp"

#include <algorithm>
#include <cmath>

#include "morphoguard/simd/kernels.hpp"

namespace morphoguard::nn {

void adam_step(std::span<Parameter* const> params, real lr, const AdamOptions& opts) {
  const auto& k = simd::active();
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    ++p->step;
    const real c1 = 1.0f - static_cast<real>(std::pow(static_cast<double>(opts.beta1), p->step));
    const real c2 = 1.0f - static_cast<real>(std::pow(static_cast<double>(opts.beta2), p->step));
    k.adam_update(p->value.data.data(), p->grad.data.data(), p->m.data.data(), p->v.data.data(), p->value.size(), lr,
                  opts.beta1, opts.beta2, opts.eps, c1, c2);
  }
}

double cosine_lr(double lr_max, double lr_min, long step, long total) {
  if (total <= 0) return lr_max;
  const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(total));
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(kPi * t));
}

}  // namespace morphoguard::nn
