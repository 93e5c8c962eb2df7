#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "parest/distributions.hpp"
#include "parest/errors.hpp"

namespace parest {

namespace detail {

inline double clamp_to(double v, const Range& r) {
  return std::clamp(v, r.lo, r.hi);
}

}  // namespace detail

// MLE: mean and root mean squared deviation with the N denominator (not
// N-1). Optional capping clamps the estimates into the prior box.
inline ParamVector mle_normal(const std::vector<double>& sample,
                              const PriorSpec* cap_to_prior = nullptr) {
  if (sample.size() < 2) {
    throw std::invalid_argument("mle_normal: needs n >= 2");
  }
  const double n = static_cast<double>(sample.size());
  double mean = 0.0;
  for (double x : sample) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sample) ss += (x - mean) * (x - mean);
  double sigma = std::sqrt(ss / n);
  if (cap_to_prior != nullptr) {
    mean = detail::clamp_to(mean, cap_to_prior->ranges[0]);
    sigma = detail::clamp_to(sigma, cap_to_prior->ranges[1]);
  }
  return {mean, sigma};
}

inline ParamVector mle_exponential(const std::vector<double>& sample,
                                   const PriorSpec* cap_to_prior = nullptr) {
  if (sample.empty()) {
    throw std::invalid_argument("mle_exponential: empty sample");
  }
  double mean = 0.0;
  for (double x : sample) {
    if (!(x > 0.0)) {
      throw std::invalid_argument("mle_exponential: values must be > 0");
    }
    mean += x;
  }
  mean /= static_cast<double>(sample.size());
  if (cap_to_prior != nullptr) {
    mean = detail::clamp_to(mean, cap_to_prior->ranges[0]);
  }
  return {mean};
}

// Beta method of moments: with m the mean and v the variance (N
// denominator), t = m(1-m)/v - 1, alpha = m t, beta = (1-m) t. When the
// moment condition fails (t <= 0) the capped form clamps to the prior's
// lower bound; the uncapped form returns the raw values and clears
// *moment_ok.
inline ParamVector mom_beta(const std::vector<double>& sample,
                            const PriorSpec* cap_to_prior = nullptr,
                            bool* moment_ok = nullptr) {
  if (sample.size() < 2) {
    throw std::invalid_argument("mom_beta: needs n >= 2");
  }
  const double n = static_cast<double>(sample.size());
  double m = 0.0;
  double lo = sample[0];
  double hi = sample[0];
  for (double x : sample) {
    if (!(x > 0.0 && x < 1.0)) {
      throw std::invalid_argument("mom_beta: values must lie in (0, 1)");
    }
    m += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  // constant samples: the mean-subtracted sum of squares can round to a
  // tiny nonzero value, so test degeneracy on the values themselves
  if (lo == hi) throw DegenerateSampleError("mom_beta: zero variance");
  m /= n;
  double v = 0.0;
  for (double x : sample) v += (x - m) * (x - m);
  v /= n;
  if (!(v > 0.0)) throw DegenerateSampleError("mom_beta: zero variance");
  const double t = m * (1.0 - m) / v - 1.0;
  if (moment_ok != nullptr) *moment_ok = t > 0.0;
  double alpha = m * t;
  double beta = (1.0 - m) * t;
  if (cap_to_prior != nullptr) {
    if (t <= 0.0) {
      alpha = cap_to_prior->ranges[0].lo;
      beta = cap_to_prior->ranges[1].lo;
    } else {
      alpha = detail::clamp_to(alpha, cap_to_prior->ranges[0]);
      beta = detail::clamp_to(beta, cap_to_prior->ranges[1]);
    }
  }
  return {alpha, beta};
}

}  // namespace parest
