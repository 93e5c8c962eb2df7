#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "parest/adam.hpp"
#include "parest/distributions.hpp"
#include "parest/encode.hpp"
#include "parest/errors.hpp"
#include "parest/model.hpp"
#include "parest/normalize.hpp"
#include "parest/rng.hpp"

namespace parest {

struct TrainConfig {
  Family family = Family::Exponential;
  NormMode mode = NormMode::KnownRange;
  PriorSpec prior = PriorSpec::exponential_default();
  SizeSpec size = SizeSpec::fixed(30);
  EncodingScheme scheme = EncodingScheme::SeqFirst;
  ModelConfig model = ModelConfig::desk(1);

  std::int64_t total_examples = 200000;
  int batch_size = 32;
  std::int64_t eval_every = 20000;  // in examples
  int eval_tasks = 2000;
  std::uint64_t seed = 1;

  AdamConfig adam{3e-4, 0.9, 0.999, 1e-8};
  double warmup_fraction = 0.01;  // linear warmup over this share of steps
  double clip_norm = 1.0;         // global gradient-norm clip, <= 0 disables

  std::string checkpoint_path = "model.ckpt";
  bool resume = false;

  void validate() const {
    prior.validate();
    model.validate();
    if (total_examples < batch_size) {
      throw std::invalid_argument("TrainConfig: total < batch");
    }
    if (eval_every <= 0 || total_examples % eval_every != 0) {
      throw std::invalid_argument(
          "TrainConfig: eval cadence must divide total examples");
    }
    if (model.n_params_out != param_count(family)) {
      throw std::invalid_argument("TrainConfig: model output arity mismatch");
    }
  }
};

struct TrainExample {
  EncodedGrid grid;
  NormRecord record;
  ParamVector true_params;
};

// (examples_seen, held-out MSE) points, strictly increasing in the first
// component.
using LossCurve = std::vector<std::pair<std::int64_t, double>>;

namespace detail {

// Training and evaluation draw from disjoint derived streams.
inline constexpr std::uint64_t kTrainStream = 0x547261696eULL;
inline constexpr std::uint64_t kEvalStream = 0x4576616cULL;

inline std::uint64_t example_seed(std::uint64_t run_seed, std::uint64_t stream,
                                  std::uint64_t index) {
  Rng r = Rng::derive(run_seed ^ stream, index);
  return r.next_u64();
}

}  // namespace detail

// Example `index` of the given stream: draw a task, normalize, encode.
// Degenerate samples are redrawn from the continuing stream (bounded).
inline TrainExample make_example(const TrainConfig& cfg, std::uint64_t stream,
                                 std::uint64_t index) {
  Rng rng(detail::example_seed(cfg.seed, stream, index));
  for (int attempt = 0; attempt < 100; ++attempt) {
    const Task task = draw_task(rng, cfg.family, cfg.prior, cfg.size);
    try {
      const NormalizedSample ns =
          cfg.mode == NormMode::KnownRange
              ? forward_known(task.family, task.sample)
              : forward_unknown(task.family, task.sample);
      return {encode(ns.values, cfg.scheme,
                     {cfg.model.length, cfg.model.dims}),
              ns.record, task.true_params};
    } catch (const DegenerateSampleError&) {
      continue;
    }
  }
  throw DegenerateSampleError("make_example: retry budget exhausted");
}

// Held-out MSE in original parameter units over the eval stream.
inline double eval_mse(ModelState<float>& state, const TrainConfig& cfg) {
  double acc = 0.0;
  for (int i = 0; i < cfg.eval_tasks; ++i) {
    const TrainExample ex = make_example(cfg, detail::kEvalStream, i);
    const ParamVector raw = forward(state, ex.grid);
    acc += loss_value(cfg.family, ex.record, raw, ex.true_params);
  }
  return acc / static_cast<double>(cfg.eval_tasks);
}

struct TrainResult {
  ModelState<float> state;
  LossCurve curve;
};

inline void write_loss_curve(const LossCurve& curve, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw CheckpointError("loss curve: cannot open " + path);
  os << "examples_seen,mse\n";
  os.precision(10);
  for (const auto& [n, mse] : curve) os << n << ',' << mse << '\n';
}

namespace detail {

// Optimizer sidecar next to the model checkpoint; needed so a resumed run
// reproduces the exact trajectory.
inline constexpr char kOptMagic[4] = {'P', 'F', 'O', 'P'};

inline void save_optimizer(Adam<float>& opt, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError("optimizer state: cannot open " + path);
  os.write(kOptMagic, 4);
  write_pod<std::int64_t>(os, opt.step_count());
  for (const auto* moments : {&opt.first_moments(), &opt.second_moments()}) {
    for (const Tensor<float>& t : *moments) {
      os.write(reinterpret_cast<const char*>(t.data.data()),
               static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
  }
  if (!os) throw CheckpointError("optimizer state: write failed");
}

inline void load_optimizer(Adam<float>& opt, const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("optimizer state: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kOptMagic, 4) != 0) {
    throw CheckpointError("optimizer state: bad magic");
  }
  opt.set_step_count(read_pod<std::int64_t>(is));
  for (auto* moments : {&opt.first_moments(), &opt.second_moments()}) {
    for (Tensor<float>& t : *moments) {
      is.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(float)));
      if (!is) throw CheckpointError("optimizer state: truncated");
    }
  }
}

}  // namespace detail

// Fresh examples every step (the generation stream never repeats an
// index), per-example gradient accumulation, global-norm clipping, Adam
// with linear warmup, periodic held-out evaluation, best+final
// checkpoints.
inline TrainResult train(
    const TrainConfig& cfg,
    const std::function<void(std::int64_t, double)>& on_eval = {}) {
  cfg.validate();
  ModelState<float> state;
  LossCurve curve;
  if (cfg.resume) {
    state = load_checkpoint(cfg.checkpoint_path);
    if (!(state.config == cfg.model)) {
      throw CheckpointError("train: resumed config mismatch");
    }
  } else {
    state = init_model<float>(cfg.model, cfg.seed);
  }
  std::vector<Tensor<float>*> params = state.params();
  Adam<float> opt(params, cfg.adam);
  if (cfg.resume) {
    detail::load_optimizer(opt, cfg.checkpoint_path + ".opt");
  }

  const std::int64_t total_steps = cfg.total_examples / cfg.batch_size;
  const std::int64_t warmup_steps = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(cfg.warmup_fraction *
                                   static_cast<double>(total_steps)));
  std::vector<Tensor<float>> grads;
  for (Tensor<float>* p : params) grads.emplace_back(p->rows, p->cols);

  double best_mse = std::numeric_limits<double>::infinity();
  const std::string best_path = cfg.checkpoint_path + ".best";

  auto checkpoint = [&](const std::string& path) {
    save_checkpoint(state, path);
    detail::save_optimizer(opt, path + ".opt");
  };

  std::int64_t step0 = state.examples_seen / cfg.batch_size;
  for (std::int64_t step = step0; step < total_steps; ++step) {
    for (Tensor<float>& g : grads) g.fill(0.0f);
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(step) * cfg.batch_size + b;
      const TrainExample ex = make_example(cfg, detail::kTrainStream, index);
      Tape<float> tape;
      auto refs = register_params(tape, state);
      const auto grid_ref = tape.input(grid_tensor<float>(ex.grid));
      const auto out = build_forward(tape, cfg.model, refs, grid_ref);
      const auto loss = build_loss(tape, out, ex.record, ex.true_params);
      batch_loss += static_cast<double>(tape.value(loss).at(0, 0));
      tape.backward(loss, 1.0f / static_cast<float>(cfg.batch_size));
      for (std::size_t p = 0; p < refs.size(); ++p) {
        const Tensor<float>& g = tape.grad(refs[p]);
        for (std::size_t i = 0; i < g.data.size(); ++i) {
          grads[p].data[i] += g.data[i];
        }
      }
    }
    batch_loss /= static_cast<double>(cfg.batch_size);
    if (!std::isfinite(batch_loss)) {
      throw DivergenceError("train: non-finite loss at step " +
                            std::to_string(step));
    }
    if (cfg.clip_norm > 0.0) {
      double norm2 = 0.0;
      for (const Tensor<float>& g : grads) {
        for (float x : g.data) norm2 += static_cast<double>(x) * x;
      }
      const double norm = std::sqrt(norm2);
      if (norm > cfg.clip_norm) {
        const float s = static_cast<float>(cfg.clip_norm / norm);
        for (Tensor<float>& g : grads) {
          for (float& x : g.data) x *= s;
        }
      }
    }
    const double lr_scale = std::min(
        1.0, static_cast<double>(step + 1) / static_cast<double>(warmup_steps));
    opt.step(params, grads, lr_scale);
    state.examples_seen = (step + 1) * cfg.batch_size;

    if (state.examples_seen % cfg.eval_every == 0) {
      const double mse = eval_mse(state, cfg);
      curve.emplace_back(state.examples_seen, mse);
      if (on_eval) on_eval(state.examples_seen, mse);
      if (mse < best_mse) {
        best_mse = mse;
        checkpoint(best_path);
      }
    }
  }
  checkpoint(cfg.checkpoint_path);
  return {std::move(state), std::move(curve)};
}

}  // namespace parest
