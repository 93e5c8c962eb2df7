#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "parest/errors.hpp"

namespace parest {

struct Summary {
  double mean;
  double std_dev;  // N-1 denominator
};

inline Summary summarize(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("summarize: needs n >= 2");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

struct TTestResult {
  double t;
  double p_raw;      // two-sided, normal approximation
  double p_display;  // floored at 0.0001 for table output
};

// Welch (unpooled) statistic. The p-value uses the standard normal tail;
// at n ~ 1e5 the t-distribution is identical at the reported precision.
inline TTestResult two_sample_t(double mean1, double std1, std::size_t n1,
                                double mean2, double std2, std::size_t n2) {
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("two_sample_t: needs n >= 2 in both groups");
  }
  if (std1 < 0.0 || std2 < 0.0) {
    throw std::invalid_argument("two_sample_t: negative std");
  }
  const double se2 = std1 * std1 / static_cast<double>(n1) +
                     std2 * std2 / static_cast<double>(n2);
  if (!(se2 > 0.0)) {
    if (mean1 == mean2) return {0.0, 1.0, 1.0};
    throw UndefinedStatisticError("two_sample_t: both stds are zero");
  }
  const double t = (mean1 - mean2) / std::sqrt(se2);
  const double p = std::erfc(std::abs(t) / std::numbers::sqrt2);
  return {t, p, std::max(p, 1e-4)};
}

}  // namespace parest
