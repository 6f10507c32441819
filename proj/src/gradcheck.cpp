#include "morphoguard/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace morphoguard::nn {

GradCheckResult gradient_check(const std::function<double()>& loss, const std::function<double()>& loss_and_backward,
                               const std::vector<Parameter*>& params, const GradCheckOptions& opts) {
  for (Parameter* p : params) p->zero_grad();
  loss_and_backward();

  std::vector<std::pair<Parameter*, std::size_t>> entries;
  for (Parameter* p : params)
    for (std::size_t i = 0; i < p->value.size(); ++i) entries.emplace_back(p, i);
  if (entries.empty()) return {};

  Rng rng = make_rng(opts.seed, "gradcheck");
  if (entries.size() > static_cast<std::size_t>(opts.samples)) {
    std::shuffle(entries.begin(), entries.end(), rng);
    entries.resize(static_cast<std::size_t>(opts.samples));
  }

  GradCheckResult result;
  for (auto [p, i] : entries) {
    real& w = p->value.data[i];
    const real original = w;
    w = static_cast<real>(original + opts.step);
    const double up_delta = static_cast<double>(w) - original;
    const double up = loss();
    w = static_cast<real>(original - opts.step);
    const double down_delta = original - static_cast<double>(w);
    const double down = loss();
    w = original;

    const double numeric = (up - down) / (up_delta + down_delta);
    const double analytic = p->grad.data[i];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    const double rel = std::abs(analytic - numeric) / denom;
    ++result.checked;
    if (rel > result.max_rel_error || result.worst_entry.empty()) {
      result.max_rel_error = std::max(result.max_rel_error, rel);
      if (rel >= result.max_rel_error) result.worst_entry = p->name + "[" + std::to_string(i) + "]";
    }
  }
  return result;
}

}  // namespace morphoguard::nn
