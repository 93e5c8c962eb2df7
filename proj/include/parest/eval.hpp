#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "parest/baselines.hpp"
#include "parest/distributions.hpp"
#include "parest/encode.hpp"
#include "parest/model.hpp"
#include "parest/normalize.hpp"
#include "parest/stats.hpp"

namespace parest {

class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string id() const = 0;
  virtual ParamVector estimate(const Task& task) const = 0;
};

class OracleEstimator : public Estimator {
 public:
  std::string id() const override { return "oracle"; }
  ParamVector estimate(const Task& task) const override {
    return task.true_params;
  }
};

class MleNormalEstimator : public Estimator {
 public:
  explicit MleNormalEstimator(std::optional<PriorSpec> cap = std::nullopt)
      : cap_(std::move(cap)) {}
  std::string id() const override {
    return cap_ ? "mle-normal-capped" : "mle-normal";
  }
  ParamVector estimate(const Task& task) const override {
    return mle_normal(task.sample, cap_ ? &*cap_ : nullptr);
  }

 private:
  std::optional<PriorSpec> cap_;
};

class MleExponentialEstimator : public Estimator {
 public:
  explicit MleExponentialEstimator(std::optional<PriorSpec> cap = std::nullopt)
      : cap_(std::move(cap)) {}
  std::string id() const override {
    return cap_ ? "mle-exponential-capped" : "mle-exponential";
  }
  ParamVector estimate(const Task& task) const override {
    return mle_exponential(task.sample, cap_ ? &*cap_ : nullptr);
  }

 private:
  std::optional<PriorSpec> cap_;
};

class MomBetaEstimator : public Estimator {
 public:
  explicit MomBetaEstimator(std::optional<PriorSpec> cap = std::nullopt)
      : cap_(std::move(cap)) {}
  std::string id() const override {
    return cap_ ? "mom-beta-capped" : "mom-beta";
  }
  ParamVector estimate(const Task& task) const override {
    return mom_beta(task.sample, cap_ ? &*cap_ : nullptr);
  }

 private:
  std::optional<PriorSpec> cap_;
};

// Normalize per the configured mode, encode, run the model, recover the
// prediction to original units.
class TransformerEstimator : public Estimator {
 public:
  TransformerEstimator(ModelState<float> state, NormMode mode,
                       EncodingScheme scheme = EncodingScheme::SeqFirst)
      : state_(std::move(state)), mode_(mode), scheme_(scheme) {}

  std::string id() const override { return "transformer"; }

  ParamVector estimate(const Task& task) const override {
    const NormalizedSample ns = mode_ == NormMode::KnownRange
                                    ? forward_known(task.family, task.sample)
                                    : forward_unknown(task.family, task.sample);
    const EncodedGrid grid = encode(
        ns.values, scheme_, {state_.config.length, state_.config.dims});
    const ParamVector raw = forward(state_, grid);
    return recover_params(task.family, ns.record, raw);
  }

 private:
  mutable ModelState<float> state_;
  NormMode mode_;
  EncodingScheme scheme_;
};

// Per-task squared errors (averaged over parameters).
struct ErrorSample {
  std::vector<double> sq_errors;
};

// Task i comes from the stream Rng::derive(seed, i), so every estimator
// evaluated with the same seed sees the same task set (paired comparison).
inline ErrorSample evaluate(const Estimator& estimator, Family family,
                            const PriorSpec& prior, const SizeSpec& size,
                            std::size_t trials, std::uint64_t seed) {
  ErrorSample out;
  out.sq_errors.reserve(trials);
  for (std::size_t i = 0; i < trials; ++i) {
    Rng rng = Rng::derive(seed, i);
    const Task task = draw_task(rng, family, prior, size);
    const ParamVector est = estimator.estimate(task);
    double acc = 0.0;
    for (std::size_t j = 0; j < est.size(); ++j) {
      const double d = est[j] - task.true_params[j];
      acc += d * d;
    }
    out.sq_errors.push_back(acc / static_cast<double>(est.size()));
  }
  return out;
}

struct Comparison {
  double t_value;
  double p_value;
  std::string reference_id;
};

struct EvalReport {
  std::string estimator_id;
  std::string family;
  std::string mode;  // "known" or "unknown"
  std::string size;  // "10", "30", "100" or "10-100"
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  std::optional<Comparison> comparison;
};

inline std::string size_label(const SizeSpec& s) {
  if (s.kind == SizeSpec::Kind::Fixed) return std::to_string(s.n);
  return std::to_string(s.lo) + "-" + std::to_string(s.hi);
}

inline EvalReport make_report(const Estimator& estimator, Family family,
                              NormMode mode, const PriorSpec& prior,
                              const SizeSpec& size, std::size_t trials,
                              std::uint64_t seed) {
  const ErrorSample errs = evaluate(estimator, family, prior, size, trials,
                                    seed);
  const Summary s = summarize(errs.sq_errors);
  EvalReport r;
  r.estimator_id = estimator.id();
  r.family = family_name(family);
  r.mode = mode == NormMode::KnownRange ? "known" : "unknown";
  r.size = size_label(size);
  r.trials = trials;
  r.seed = seed;
  r.mse_mean = s.mean;
  r.mse_std = s.std_dev;
  return r;
}

// CSV row in the paper-table column order.
inline std::string report_csv_header() {
  return "estimator,family,mode,size,trials,seed,mse_mean,mse_std,t_value,"
         "p_value,reference";
}

inline std::string report_csv_row(const EvalReport& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.estimator_id << ',' << r.family << ',' << r.mode << ',' << r.size
     << ',' << r.trials << ',' << r.seed << ',' << r.mse_mean << ','
     << r.mse_std << ',';
  if (r.comparison) {
    os << r.comparison->t_value << ',' << r.comparison->p_value << ','
       << r.comparison->reference_id;
  } else {
    os << ",,";
  }
  return os.str();
}

}  // namespace parest
