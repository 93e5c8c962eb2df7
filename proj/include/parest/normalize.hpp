#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "parest/distributions.hpp"
#include "parest/errors.hpp"

namespace parest {

enum class NormMode { KnownRange, UnknownRange };

// Everything needed to invert the forward transform exactly.
struct NormRecord {
  NormMode mode;
  Family family;
  double a = 0.0;       // shift: min(s) for UnknownRange-Normal, else 0
  double b = 1.0;       // scale anchor: max(s) for UnknownRange, cap width known
  double cap_lo = 0.0;  // KnownRange only
  double cap_hi = 1.0;
};

// Known-range cap bounds: exponential values land in [0, 20] (P(x > 20)
// < 0.5% for beta <= 2), normal values in [-35, 35] (>= 3 sigma from the
// mean under the default prior).
inline constexpr double kExpCapHi = 20.0;
inline constexpr double kNormalCapLo = -35.0;
inline constexpr double kNormalCapHi = 35.0;

struct NormalizedSample {
  std::vector<double> values;  // all in [0, 1]
  NormRecord record;
};

// Fixed cap-and-scale transform. Beta needs none: its support is already
// (0, 1).
inline NormalizedSample forward_known(Family family,
                                      const std::vector<double>& sample) {
  if (sample.empty()) {
    throw std::invalid_argument("forward_known: empty sample");
  }
  NormalizedSample out;
  out.record.mode = NormMode::KnownRange;
  out.record.family = family;
  out.values.reserve(sample.size());
  switch (family) {
    case Family::Exponential:
      out.record.cap_lo = 0.0;
      out.record.cap_hi = kExpCapHi;
      out.record.b = kExpCapHi;
      for (double x : sample) {
        out.values.push_back(std::clamp(x, 0.0, kExpCapHi) / kExpCapHi);
      }
      break;
    case Family::Normal:
      out.record.cap_lo = kNormalCapLo;
      out.record.cap_hi = kNormalCapHi;
      out.record.a = kNormalCapLo;
      out.record.b = kNormalCapHi - kNormalCapLo;
      for (double x : sample) {
        out.values.push_back(
            (std::clamp(x, kNormalCapLo, kNormalCapHi) - kNormalCapLo) /
            (kNormalCapHi - kNormalCapLo));
      }
      break;
    case Family::Beta:
      out.record.cap_lo = 0.0;
      out.record.cap_hi = 1.0;
      out.record.b = 1.0;
      for (double x : sample) out.values.push_back(std::clamp(x, 0.0, 1.0));
      break;
  }
  return out;
}

// Per-sample min-max transform that hides the parameter range from the
// model: Exponential x/max(s), Normal (x - min)/(max - min). Defined only
// for these two families.
inline NormalizedSample forward_unknown(Family family,
                                        const std::vector<double>& sample) {
  if (sample.empty()) {
    throw std::invalid_argument("forward_unknown: empty sample");
  }
  NormalizedSample out;
  out.record.mode = NormMode::UnknownRange;
  out.record.family = family;
  out.values.reserve(sample.size());
  if (family == Family::Exponential) {
    double b = 0.0;
    for (double x : sample) {
      if (!(x > 0.0)) {
        throw std::invalid_argument(
            "forward_unknown: exponential sample must be positive");
      }
      b = std::max(b, x);
    }
    if (!(b > 0.0)) {
      throw DegenerateSampleError("forward_unknown: max(s) == 0");
    }
    out.record.b = b;
    for (double x : sample) out.values.push_back(std::min(x / b, 1.0));
  } else if (family == Family::Normal) {
    if (sample.size() < 2) {
      throw std::invalid_argument("forward_unknown: normal needs n >= 2");
    }
    const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
    const double a = *mn;
    const double b = *mx;
    if (!(b > a)) {
      throw DegenerateSampleError("forward_unknown: max(s) == min(s)");
    }
    out.record.a = a;
    out.record.b = b;
    for (double x : sample) {
      out.values.push_back(std::clamp((x - a) / (b - a), 0.0, 1.0));
    }
  } else {
    throw std::invalid_argument(
        "forward_unknown: defined for Exponential and Normal only");
  }
  return out;
}

// Per-parameter affine map from model output space to original units:
// recovered[i] = mult[i] * raw[i] + add[i]. Exposing the coefficients lets
// training differentiate through the recovery.
struct RecoveryAffine {
  std::vector<double> mult;
  std::vector<double> add;
};

inline RecoveryAffine recovery_affine(const NormRecord& record) {
  RecoveryAffine r;
  if (record.mode == NormMode::KnownRange) {
    // Model predicts parameter values directly.
    const int p = param_count(record.family);
    r.mult.assign(p, 1.0);
    r.add.assign(p, 0.0);
    return r;
  }
  switch (record.family) {
    case Family::Exponential:
      r.mult = {record.b};
      r.add = {0.0};
      break;
    case Family::Normal:
      r.mult = {record.b - record.a, record.b - record.a};
      r.add = {record.a, 0.0};
      break;
    default:
      throw std::invalid_argument("recovery_affine: unsupported family");
  }
  return r;
}

inline ParamVector recover_params(Family family, const NormRecord& record,
                                  const ParamVector& raw) {
  if (family != record.family) {
    throw std::invalid_argument("recover_params: family/record mismatch");
  }
  if (static_cast<int>(raw.size()) != param_count(family)) {
    throw std::invalid_argument("recover_params: arity mismatch");
  }
  const RecoveryAffine aff = recovery_affine(record);
  ParamVector out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = aff.mult[i] * raw[i] + aff.add[i];
  }
  return out;
}

}  // namespace parest
