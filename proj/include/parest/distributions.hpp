#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "parest/rng.hpp"

namespace parest {

enum class Family { Normal, Exponential, Beta };

inline int param_count(Family f) { return f == Family::Exponential ? 1 : 2; }

inline std::string family_name(Family f) {
  switch (f) {
    case Family::Normal:
      return "normal";
    case Family::Exponential:
      return "exponential";
    case Family::Beta:
      return "beta";
  }
  return "?";
}

using ParamVector = std::vector<double>;

struct Range {
  double lo;
  double hi;
};

// Uniform per-parameter ranges. These are the single source of truth for
// estimator capping.
struct PriorSpec {
  std::vector<Range> ranges;

  static PriorSpec normal_default() { return {{{-5.0, 5.0}, {1.0, 10.0}}}; }
  static PriorSpec exponential_default() { return {{{0.5, 2.0}}}; }
  static PriorSpec beta_low() { return {{{0.0, 1.0}, {0.0, 1.0}}}; }
  static PriorSpec beta_wide() { return {{{0.5, 5.0}, {0.5, 5.0}}}; }

  void validate() const {
    for (const Range& r : ranges) {
      if (!(r.lo < r.hi)) {
        throw std::invalid_argument("PriorSpec: requires lo < hi");
      }
    }
  }
};

struct SizeSpec {
  enum class Kind { Fixed, LogUniform };
  Kind kind = Kind::Fixed;
  int n = 30;       // Fixed only
  int lo = 10;      // LogUniform bounds
  int hi = 100;

  static SizeSpec fixed(int n) { return {Kind::Fixed, n, 0, 0}; }
  static SizeSpec log_uniform(int lo = 10, int hi = 100) {
    return {Kind::LogUniform, 0, lo, hi};
  }
};

struct Task {
  Family family;
  ParamVector true_params;
  std::vector<double> sample;
};

inline double sample_normal(Rng& rng, double mu, double sigma) {
  return rng.normal(mu, sigma);
}

inline double sample_exponential(Rng& rng, double beta) {
  return rng.exponential(beta);
}

inline double sample_beta(Rng& rng, double alpha, double beta) {
  return rng.beta(alpha, beta);
}

// Fixed(n) -> n; LogUniform -> floor of exp(U(ln lo, ln hi)), clamped into
// [lo, hi]. Truncation (not rounding) is what reproduces the published
// variable-size baseline MSEs.
inline int draw_size(Rng& rng, const SizeSpec& spec) {
  if (spec.kind == SizeSpec::Kind::Fixed) {
    if (spec.n < 1) throw std::invalid_argument("draw_size: n must be >= 1");
    return spec.n;
  }
  const double u = rng.uniform(std::log(static_cast<double>(spec.lo)),
                               std::log(static_cast<double>(spec.hi)));
  const int n = static_cast<int>(std::floor(std::exp(u)));
  return std::max(spec.lo, std::min(spec.hi, n));
}

inline double sample_one(Rng& rng, Family family, const ParamVector& p) {
  switch (family) {
    case Family::Normal:
      return sample_normal(rng, p[0], p[1]);
    case Family::Exponential:
      return sample_exponential(rng, p[0]);
    case Family::Beta:
      return sample_beta(rng, p[0], p[1]);
  }
  throw std::invalid_argument("sample_one: unknown family");
}

// Parameters i.i.d. uniform from the prior ranges, then a sample of
// draw_size observations from that instance.
inline Task draw_task(Rng& rng, Family family, const PriorSpec& prior,
                      const SizeSpec& size) {
  prior.validate();
  if (static_cast<int>(prior.ranges.size()) != param_count(family)) {
    throw std::invalid_argument("draw_task: prior arity mismatch");
  }
  Task task;
  task.family = family;
  for (const Range& r : prior.ranges) {
    double v = rng.uniform(r.lo, r.hi);
    // Open-ended presets like (0,1) for Beta must stay strictly positive.
    while (family == Family::Beta && v <= 0.0) v = rng.uniform(r.lo, r.hi);
    task.true_params.push_back(v);
  }
  const int n = draw_size(rng, size);
  task.sample.reserve(n);
  for (int i = 0; i < n; ++i) {
    task.sample.push_back(sample_one(rng, family, task.true_params));
  }
  return task;
}

}  // namespace parest
