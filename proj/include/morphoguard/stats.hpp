#pragma once

#include <span>
#include <vector>

namespace morphoguard::stats {

double mean(std::span<const double> x);
/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
double stddev(std::span<const double> x);
/// Linear interpolation between order statistics, q in [0, 1].
double quantile(std::vector<double> x, double q);

struct WelchResult {
  double t = 0.0;
  double dof = 0.0;
  double p_value = 1.0;  // two-sided
};

/// Welch's unequal-variance t test. Each sample needs at least two values.
/// Samples with zero variance and equal means give p = 1.
WelchResult welch_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided Student-t tail probability P(|T| ≥ |t|) via the regularized incomplete beta function.
double student_t_two_sided_p(double t, double dof);

/// Two-sample Kolmogorov–Smirnov statistic sup |F_a − F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// 100 · (baseline − candidate) / baseline. Throws ConfigError for a zero baseline.
double relative_improvement(double candidate, double baseline);

}  // namespace morphoguard::stats
