// Acceptance gate: one pass/fail line per criterion, exit 0 only if all
// criteria hold. Tolerances are fixed here, not configurable.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "parest/baselines.hpp"
#include "parest/distributions.hpp"
#include "parest/encode.hpp"
#include "parest/eval.hpp"
#include "parest/model.hpp"
#include "parest/stats.hpp"
#include "parest/trainer.hpp"

namespace {

using namespace parest;

int g_failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%s %s  %s\n", id.c_str(), ok ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::vector<SizeSpec> table_sizes() {
  return {SizeSpec::fixed(10), SizeSpec::fixed(30), SizeSpec::fixed(100),
          SizeSpec::log_uniform()};
}

constexpr std::size_t kTrials = 100000;

// Four-size Monte Carlo sweep against published MSE means.
void check_table(const std::string& id, const Estimator& est, Family family,
                 const PriorSpec& prior, const double (&targets)[4],
                 double rel_tol, std::uint64_t seed, double note_tol = 0.0) {
  const auto sizes = table_sizes();
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    const ErrorSample errs =
        evaluate(est, family, prior, sizes[i], kTrials, seed + i);
    const double mean = summarize(errs.sq_errors).mean;
    const double rel = std::abs(mean - targets[i]) / targets[i];
    if (rel > rel_tol) ok = false;
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%s[n=%s: %.4f vs %.4f]",
                  detail.empty() ? "" : " ", size_label(sizes[i]).c_str(),
                  mean, targets[i]);
    detail += buf;
    if (note_tol > 0.0 && rel > note_tol) {
      std::printf("%s NOTE  n=%s deviates %.1f%% from the published value "
                  "(moment-condition conventions differ; loose gate applies)\n",
                  id.c_str(), size_label(sizes[i]).c_str(), 100.0 * rel);
    }
  }
  report(id, ok, detail);
}

void a1_a2_a3_a4() {
  {
    const PriorSpec prior = PriorSpec::exponential_default();
    const double targets[4] = {0.1113, 0.0445, 0.0149, 0.0503};
    check_table("A1", MleExponentialEstimator(prior), Family::Exponential,
                prior, targets, 0.03, 1100);
  }
  {
    const PriorSpec prior = PriorSpec::normal_default();
    const double targets[4] = {2.2809, 0.8056, 0.2558, 0.9636};
    check_table("A2", MleNormalEstimator(prior), Family::Normal, prior,
                targets, 0.03, 1200);
  }
  {
    const PriorSpec exp_prior = PriorSpec::exponential_default();
    const double exp_targets[4] = {0.1750, 0.0586, 0.0174, 0.0730};
    check_table("A3-exponential", MleExponentialEstimator(),
                Family::Exponential, exp_prior, exp_targets, 0.03, 1300);
    const PriorSpec norm_prior = PriorSpec::normal_default();
    const double norm_targets[4] = {2.8637, 0.9316, 0.2780, 1.1309};
    check_table("A3-normal", MleNormalEstimator(), Family::Normal, norm_prior,
                norm_targets, 0.03, 1400);
  }
  {
    const PriorSpec prior = PriorSpec::beta_low();
    const double targets[4] = {0.0933, 0.3313, 0.2873, 0.1756};
    check_table("A4", MomBetaEstimator(prior), Family::Beta, prior, targets,
                0.25, 1500, 0.10);
  }
}

void a5() {
  // (mle mean, mle std, ours mean, ours std, published t), n = 1e5 both.
  const double rows[][5] = {
      // exponential, known range
      {0.1113, 0.1726, 0.0796, 0.1168, 48.101},
      {0.0445, 0.0727, 0.0375, 0.0631, 22.995},
      {0.0149, 0.0250, 0.0143, 0.0222, 6.4316},
      {0.0503, 0.0949, 0.0413, 0.0751, 23.517},
      // exponential, unknown range
      {0.1750, 0.3479, 0.1613, 0.2816, 9.6793},
      {0.0586, 0.1078, 0.0584, 0.1001, 0.4299},
      {0.0174, 0.0312, 0.0182, 0.0323, -5.2726},
      {0.0730, 0.1763, 0.0691, 0.1468, 5.3758},
      // normal, known range
      {2.2809, 3.3162, 1.7337, 2.3722, 42.439},
      {0.8056, 1.2578, 0.7169, 1.0949, 16.8203},
      {0.2558, 0.3960, 0.2492, 0.3786, 3.8418},
      {0.9636, 1.7916, 0.8106, 1.4343, 21.0818},
  };
  bool ok = true;
  double worst = 0.0;
  for (const auto& r : rows) {
    const TTestResult res =
        two_sample_t(r[0], r[1], kTrials, r[2], r[3], kTrials);
    const double err = std::abs(res.t - r[4]);
    // published means carry four decimals; the induced t uncertainty is
    // 1e-4 / SE, which dominates on the small-mean rows
    const double se = std::sqrt((r[1] * r[1] + r[3] * r[3]) / kTrials);
    const double tol = 0.01 + 1e-4 / se;
    worst = std::max(worst, err / tol);
    if (err > tol) ok = false;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "[12 rows, worst |dt| = %.2f x rounding-aware tolerance]",
                worst);
  report("A5", ok, buf);
}

void a6() {
  bool ok = true;
  std::string detail;
  Rng rng(606);
  for (const GridShape shape : {GridShape{1024, 384}, GridShape{64, 64}}) {
    for (const EncodingScheme scheme :
         {EncodingScheme::SeqFirst, EncodingScheme::EmbedFirst}) {
      // mass conservation over random samples
      double worst_mass = 0.0;
      for (int trial = 0; trial < 10000 / 4; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform() * 100.0);
        std::vector<double> vals(n);
        for (double& v : vals) v = rng.uniform();
        const EncodedGrid grid = encode(vals, scheme, shape);
        worst_mass = std::max(
            worst_mass, std::abs(grid.total() - n) / static_cast<double>(n));
      }
      if (worst_mass > 1e-4) ok = false;
      // single-value round trip
      const double bound =
          1.0 / (static_cast<double>(shape.length) * shape.dims);
      double worst_rt = 0.0;
      for (int trial = 0; trial < 1000; ++trial) {
        const double v = rng.uniform();
        const EncodedGrid grid = encode({v}, scheme, shape);
        worst_rt = std::max(worst_rt, std::abs(decode_single(grid, scheme) - v));
      }
      if (worst_rt > bound) ok = false;
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "[%dx%d ok] ", shape.length, shape.dims);
    detail += buf;
  }
  // worked example: 0.500001 on the full grid, seq-first
  const EncodedGrid g = encode({0.500001}, EncodingScheme::SeqFirst,
                               {1024, 384});
  const double w0 = g.at(512, 0);
  const double w1 = g.at(512, 1);
  const bool ex_ok =
      std::abs(w0 - 0.606784) < 1e-4 && std::abs(w1 - 0.393216) < 1e-4;
  if (!ex_ok) ok = false;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "[0.500001 -> %.6f / %.6f]", w0, w1);
  report("A6", ok, detail + buf);
}

void a7() {
  TrainConfig cfg;  // defaults are exactly the desk protocol
  cfg.seed = 7;
  cfg.checkpoint_path =
      (std::filesystem::temp_directory_path() / "acceptance_desk.ckpt")
          .string();
  const TrainResult res = train(cfg, [](std::int64_t seen, double mse) {
    std::printf("A7 ...  examples=%lld eval_mse=%.5f\n",
                static_cast<long long>(seen), mse);
    std::fflush(stdout);
  });
  // reference: capped MLE on the same protocol (exponential known, n=30)
  const PriorSpec prior = PriorSpec::exponential_default();
  const ErrorSample mle = evaluate(MleExponentialEstimator(prior),
                                   Family::Exponential, prior,
                                   SizeSpec::fixed(30), kTrials, 1101);
  const double mle_mse = summarize(mle.sq_errors).mean;
  const double final_mse = res.curve.back().second;
  const bool decreasing = res.curve.back().second < res.curve.front().second;
  const bool ok = final_mse <= 1.5 * mle_mse && decreasing;
  char buf[96];
  std::snprintf(buf, sizeof(buf),
                "[final %.4f vs gate %.4f (1.5 x MLE %.4f), curve %s]",
                final_mse, 1.5 * mle_mse, mle_mse,
                decreasing ? "decreasing" : "NOT decreasing");
  report("A7", ok, buf);
}

void a8() {
  const ModelConfig cfg = ModelConfig::desk(1);
  ModelState<double> state = init_model<double>(cfg, 88);
  Rng rng(888);
  const Task task = draw_task(rng, Family::Exponential,
                              PriorSpec::exponential_default(),
                              SizeSpec::fixed(30));
  const NormalizedSample ns = forward_known(task.family, task.sample);
  const EncodedGrid grid = encode(ns.values, EncodingScheme::SeqFirst,
                                  {cfg.length, cfg.dims});
  const NormRecord rec = ns.record;
  const ParamVector truth = task.true_params;

  auto loss_at = [&](ModelState<double>& s) {
    Tape<double> tape;
    auto refs = register_params(tape, s);
    const auto grid_ref = tape.input(grid_tensor<double>(grid));
    const auto out = build_forward(tape, cfg, refs, grid_ref);
    const auto loss = build_loss(tape, out, rec, truth);
    return std::pair(std::move(tape), loss);
  };

  auto [tape, loss] = loss_at(state);
  tape.backward(loss);

  // loss_at registers the parameters first, so tape refs 0..N-1 line up
  // with params() order
  std::vector<Tensor<double>*> params = state.params();
  bool ok = true;
  double worst = 0.0;
  for (int probe = 0; probe < 100; ++probe) {
    const std::size_t t = rng.next_u64() % params.size();
    const std::size_t i = rng.next_u64() % params[t]->data.size();
    const double analytic =
        tape.grad(static_cast<int>(t)).data[i];
    const double w0 = params[t]->data[i];
    const double h = 1e-5 * std::max(1.0, std::abs(w0));
    params[t]->data[i] = w0 + h;
    auto [tp, lp] = loss_at(state);
    const double fp = tp.value(lp).at(0, 0);
    params[t]->data[i] = w0 - h;
    auto [tm, lm] = loss_at(state);
    const double fm = tm.value(lm).at(0, 0);
    params[t]->data[i] = w0;
    const double numeric = (fp - fm) / (2.0 * h);
    const double rel = std::abs(analytic - numeric) /
                       std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    worst = std::max(worst, rel);
    if (rel > 1e-4) ok = false;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "[100 weights, worst rel err = %.2e]",
                worst);
  report("A8", ok, buf);
}

void a9() {
  const PriorSpec prior = PriorSpec::exponential_default();
  const EvalReport r1 =
      make_report(MleExponentialEstimator(prior), Family::Exponential,
                  NormMode::KnownRange, prior, SizeSpec::fixed(10), 5000, 9);
  const EvalReport r2 =
      make_report(MleExponentialEstimator(prior), Family::Exponential,
                  NormMode::KnownRange, prior, SizeSpec::fixed(10), 5000, 9);
  const bool reports_equal =
      r1.mse_mean == r2.mse_mean && r1.mse_std == r2.mse_std;

  ModelState<float> model = init_model<float>(ModelConfig::desk(1), 99);
  const std::string path =
      (std::filesystem::temp_directory_path() / "acceptance_a9.ckpt")
          .string();
  save_checkpoint(model, path);
  ModelState<float> loaded = load_checkpoint(path);
  Rng rng(909);
  bool forward_equal = true;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> vals(30);
    for (double& v : vals) v = rng.uniform();
    const EncodedGrid grid =
        encode(vals, EncodingScheme::SeqFirst, {64, 64});
    if (forward(model, grid) != forward(loaded, grid)) forward_equal = false;
  }
  report("A9", reports_equal && forward_equal,
         std::string("[reports ") + (reports_equal ? "identical" : "differ") +
             ", checkpointed forward " +
             (forward_equal ? "bit-identical]" : "differs]"));
}

}  // namespace

int main() {
  a1_a2_a3_a4();
  a5();
  a6();
  a7();
  a8();
  a9();
  std::printf("%s (%d failing)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
