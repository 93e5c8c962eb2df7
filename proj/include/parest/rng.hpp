#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace parest {

// Deterministic 64-bit stream generator based on the splitmix64 finalizer
// (Steele, Lea & Flood 2014; constants 0x9E3779B97F4A7C15,
// 0xBF58476D1CE4E5B9, 0x94D049BB133111EB). Independent sub-streams are
// obtained by hashing (seed, index), so parallel generation at any worker
// count reproduces the single-threaded stream bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Independent stream for element `index` of the stream family `seed`.
  static Rng derive(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix(seed ^ mix(index + kGamma)));
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("uniform: requires lo < hi");
    return lo + (hi - lo) * uniform();
  }

  // Box-Muller without spare caching: two uniforms per draw.
  double normal(double mu, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu)) {
      throw std::invalid_argument("normal: sigma must be finite and > 0");
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mu + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Scale parameterization: pdf (1/beta) exp(-x/beta).
  double exponential(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      throw std::invalid_argument("exponential: beta must be finite and > 0");
    }
    return -beta * std::log(1.0 - uniform());
  }

  // Marsaglia-Tsang squeeze method, unit scale. For shape < 1 draws
  // Gamma(shape + 1) and applies the boost U^(1/shape), exact for all
  // shape > 0.
  double gamma(double shape) {
    if (!(shape > 0.0) || !std::isfinite(shape)) {
      throw std::invalid_argument("gamma: shape must be finite and > 0");
    }
    if (shape < 1.0) {
      const double u = 1.0 - uniform();  // (0, 1]
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal(0.0, 1.0);
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = 1.0 - uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Exact gamma-ratio construction, valid for all alpha, beta > 0.
  double beta(double alpha, double beta_param) {
    if (!(alpha > 0.0) || !(beta_param > 0.0) || !std::isfinite(alpha) ||
        !std::isfinite(beta_param)) {
      throw std::invalid_argument("beta: parameters must be finite and > 0");
    }
    for (;;) {
      const double x = gamma(alpha);
      const double y = gamma(beta_param);
      const double s = x + y;
      if (s > 0.0) {
        const double r = x / s;
        if (r > 0.0 && r < 1.0) return r;  // keep the open-interval support
      }
    }
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace parest
