// Command-line front end: sample encoding, baseline and transformer
// evaluation, training, and the two-sample t-test over stored reports.
//
// Exit codes: 0 success, 2 config/input error, 3 training divergence,
// 4 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "parest/baselines.hpp"
#include "parest/distributions.hpp"
#include "parest/encode.hpp"
#include "parest/errors.hpp"
#include "parest/eval.hpp"
#include "parest/model.hpp"
#include "parest/normalize.hpp"
#include "parest/stats.hpp"
#include "parest/trainer.hpp"

namespace {

using json = nlohmann::json;
using namespace parest;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

Family parse_family(const std::string& s) {
  if (s == "normal") return Family::Normal;
  if (s == "exponential") return Family::Exponential;
  if (s == "beta") return Family::Beta;
  throw CLI::ValidationError("--family", "unknown family: " + s);
}

NormMode parse_mode(const std::string& s) {
  if (s == "known") return NormMode::KnownRange;
  if (s == "unknown") return NormMode::UnknownRange;
  throw CLI::ValidationError("--mode", "unknown mode: " + s);
}

EncodingScheme parse_scheme(const std::string& s) {
  if (s == "seq-first" || s == "seq") return EncodingScheme::SeqFirst;
  if (s == "embed-first" || s == "embed") return EncodingScheme::EmbedFirst;
  throw CLI::ValidationError("--scheme", "unknown scheme: " + s);
}

// "10", "30", ... or "10-100" for log-uniform.
SizeSpec parse_size(const std::string& s) {
  const auto dash = s.find('-');
  try {
    if (dash == std::string::npos) return SizeSpec::fixed(std::stoi(s));
    return SizeSpec::log_uniform(std::stoi(s.substr(0, dash)),
                                 std::stoi(s.substr(dash + 1)));
  } catch (const std::exception&) {
    throw CLI::ValidationError("--size", "bad size spec: " + s);
  }
}

PriorSpec default_prior(Family family, const std::string& beta_preset) {
  switch (family) {
    case Family::Normal:
      return PriorSpec::normal_default();
    case Family::Exponential:
      return PriorSpec::exponential_default();
    case Family::Beta:
      if (beta_preset == "beta-low") return PriorSpec::beta_low();
      if (beta_preset == "beta-wide") return PriorSpec::beta_wide();
      throw CLI::ValidationError("--prior", "unknown preset: " + beta_preset);
  }
  throw CLI::ValidationError("--family", "unknown family");
}

json report_to_json(const EvalReport& r) {
  json j{{"estimator", r.estimator_id}, {"family", r.family},
         {"mode", r.mode},             {"size", r.size},
         {"trials", r.trials},         {"seed", r.seed},
         {"mse_mean", r.mse_mean},     {"mse_std", r.mse_std}};
  if (r.comparison) {
    j["comparison"] = {{"t_value", r.comparison->t_value},
                       {"p_value", r.comparison->p_value},
                       {"reference", r.comparison->reference_id}};
  }
  return j;
}

void write_report(const EvalReport& r, const std::string& out_prefix) {
  if (out_prefix.empty()) {
    std::cout << report_to_json(r).dump(2) << "\n";
    return;
  }
  std::ofstream js(out_prefix + ".json", std::ios::trunc);
  std::ofstream cs(out_prefix + ".csv", std::ios::trunc);
  if (!js || !cs) throw CheckpointError("cannot write report " + out_prefix);
  js << report_to_json(r).dump(2) << "\n";
  cs << report_csv_header() << "\n" << report_csv_row(r) << "\n";
  if (!js || !cs) throw CheckpointError("report write failed " + out_prefix);
}

int cmd_encode(const std::string& input, const std::string& scheme_s, int L,
               int K) {
  std::ifstream is(input);
  if (!is) {
    std::cerr << "encode: cannot open " << input << "\n";
    return kExitIo;
  }
  const EncodingScheme scheme = parse_scheme(scheme_s);
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    double v = 0.0;
    char trailing = 0;
    if (!(ls >> v) || (ls >> trailing) || !(v >= 0.0 && v <= 1.0)) {
      std::cerr << "encode: bad value at line " << line_no << "\n";
      return kExitConfig;
    }
    values.push_back(v);
  }
  const EncodedGrid grid = encode(values, scheme, {L, K});
  std::cout.precision(10);
  for (int pos = 0; pos < L; ++pos) {
    for (int dim = 0; dim < K; ++dim) {
      const float w = grid.at(pos, dim);
      if (w != 0.0f) std::cout << pos << ' ' << dim << ' ' << w << '\n';
    }
  }
  return kExitOk;
}

struct EvalArgs {
  std::string family = "exponential";
  std::string mode = "known";
  std::string size = "30";
  std::string beta_prior = "beta-low";
  std::size_t trials = 100000;
  std::uint64_t seed = 0;
  std::string out;
};

void add_eval_args(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--family", a.family, "normal | exponential | beta");
  cmd->add_option("--mode", a.mode, "known | unknown");
  cmd->add_option("--size", a.size, "sample size: N or lo-hi (log-uniform)");
  cmd->add_option("--prior", a.beta_prior,
                  "beta prior preset: beta-low | beta-wide");
  cmd->add_option("--trials", a.trials, "Monte Carlo task count");
  cmd->add_option("--seed", a.seed, "base seed for the task stream")
      ->required();
  cmd->add_option("--out", a.out, "output prefix (.json/.csv); stdout if unset");
}

int cmd_baseline(const EvalArgs& a, const std::string& estimator_s) {
  const Family family = parse_family(a.family);
  const NormMode mode = parse_mode(a.mode);
  const PriorSpec prior = default_prior(family, a.beta_prior);
  // Known-range baselines are capped into the prior box; unknown-range
  // ones use the plain formulas.
  const bool cap = mode == NormMode::KnownRange;
  std::unique_ptr<Estimator> est;
  std::string kind = estimator_s;
  if (kind == "auto") kind = family == Family::Beta ? "mom" : "mle";
  if (kind == "oracle") {
    est = std::make_unique<OracleEstimator>();
  } else if (kind == "mle" && family == Family::Normal) {
    est = std::make_unique<MleNormalEstimator>(
        cap ? std::optional<PriorSpec>(prior) : std::nullopt);
  } else if (kind == "mle" && family == Family::Exponential) {
    est = std::make_unique<MleExponentialEstimator>(
        cap ? std::optional<PriorSpec>(prior) : std::nullopt);
  } else if (kind == "mom" && family == Family::Beta) {
    est = std::make_unique<MomBetaEstimator>(
        cap ? std::optional<PriorSpec>(prior) : std::nullopt);
  } else {
    throw CLI::ValidationError("--estimator",
                               "no estimator '" + kind + "' for " + a.family);
  }
  const EvalReport r = make_report(*est, family, mode, prior,
                                   parse_size(a.size), a.trials, a.seed);
  write_report(r, a.out);
  return kExitOk;
}

int cmd_evaluate(const EvalArgs& a, const std::string& checkpoint,
                 const std::string& scheme_s) {
  const Family family = parse_family(a.family);
  const NormMode mode = parse_mode(a.mode);
  const PriorSpec prior = default_prior(family, a.beta_prior);
  const TransformerEstimator est(load_checkpoint(checkpoint), mode,
                                 parse_scheme(scheme_s));
  const EvalReport r = make_report(est, family, mode, prior,
                                   parse_size(a.size), a.trials, a.seed);
  write_report(r, a.out);
  return kExitOk;
}

EvalReport load_report(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CheckpointError("cannot open report " + path);
  json j;
  is >> j;
  EvalReport r;
  r.estimator_id = j.at("estimator");
  r.family = j.at("family");
  r.mode = j.at("mode");
  r.size = j.at("size");
  r.trials = j.at("trials");
  r.seed = j.at("seed");
  r.mse_mean = j.at("mse_mean");
  r.mse_std = j.at("mse_std");
  return r;
}

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out) {
  const EvalReport a = load_report(path_a);
  const EvalReport b = load_report(path_b);
  if (a.trials != b.trials) {
    std::cerr << "compare: trial counts differ (" << a.trials << " vs "
              << b.trials << ")\n";
    return kExitConfig;
  }
  const TTestResult t = two_sample_t(a.mse_mean, a.mse_std, a.trials,
                                     b.mse_mean, b.mse_std, b.trials);
  EvalReport merged = a;
  merged.comparison = Comparison{t.t, t.p_display, b.estimator_id};
  std::cout << report_csv_header() << "\n" << report_csv_row(merged) << "\n";
  if (!out.empty()) {
    json j = report_to_json(merged);
    j["comparison"]["p_value_raw"] = t.p_raw;
    std::ofstream os(out, std::ios::trunc);
    if (!os) throw CheckpointError("cannot write " + out);
    os << j.dump(2) << "\n";
  }
  return kExitOk;
}

struct TrainArgs {
  std::string preset = "desk";
  std::string family = "exponential";
  std::string mode = "known";
  std::string size = "30";
  std::string beta_prior = "beta-low";
  std::string scheme = "seq-first";
  std::int64_t total = -1;
  int batch = 32;
  std::int64_t eval_every = -1;
  int eval_tasks = 2000;
  double lr = -1.0;
  std::uint64_t seed = 0;
  std::string checkpoint = "model.ckpt";
  std::string curve;
  bool resume = false;
  bool no_positional = false;
};

int cmd_train(const TrainArgs& a) {
  TrainConfig cfg;
  cfg.family = parse_family(a.family);
  cfg.mode = parse_mode(a.mode);
  cfg.prior = default_prior(cfg.family, a.beta_prior);
  cfg.size = parse_size(a.size);
  cfg.scheme = parse_scheme(a.scheme);
  const int p_out = param_count(cfg.family);
  if (a.preset == "desk") {
    cfg.model = ModelConfig::desk(p_out);
    cfg.total_examples = 200000;
    cfg.adam.lr = 3e-4;
  } else if (a.preset == "paper-full") {
    cfg.model = ModelConfig::paper_full(p_out);
    cfg.total_examples = 9900000;
    cfg.adam.lr = 1e-4;
    std::cerr << "warning: the full preset trains on 9.9M examples; "
                 "comparable runs took on the order of 60-70 hours on a "
                 "datacenter GPU and far longer on CPU\n";
  } else {
    throw CLI::ValidationError("--preset", "unknown preset: " + a.preset);
  }
  if (a.total > 0) cfg.total_examples = a.total;
  if (a.lr > 0) cfg.adam.lr = a.lr;
  cfg.batch_size = a.batch;
  cfg.eval_every = a.eval_every > 0 ? a.eval_every : cfg.total_examples / 10;
  cfg.eval_tasks = a.eval_tasks;
  cfg.seed = a.seed;
  cfg.checkpoint_path = a.checkpoint;
  cfg.resume = a.resume;
  cfg.model.positional_embeddings = !a.no_positional;

  const TrainResult res = train(cfg, [](std::int64_t seen, double mse) {
    std::cout << "examples=" << seen << " eval_mse=" << mse << std::endl;
  });
  const std::string curve_path =
      a.curve.empty() ? a.checkpoint + ".curve.csv" : a.curve;
  write_loss_curve(res.curve, curve_path);
  std::cout << "checkpoint: " << cfg.checkpoint_path << "\n"
            << "loss curve: " << curve_path << "\n";
  return kExitOk;
}

int cmd_ttest(double mean1, double std1, std::size_t n1, double mean2,
              double std2, std::size_t n2) {
  const TTestResult r = two_sample_t(mean1, std1, n1, mean2, std2, n2);
  std::cout.precision(6);
  std::cout << "t=" << r.t << " p=" << r.p_display << " p_raw=" << r.p_raw
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transformer-based parameter estimation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "",
                 "key=value config file; subcommand options go under a "
                 "section header like [train]");

  // encode
  auto* enc = app.add_subcommand("encode", "dump the embedding grid cells "
                                           "for a file of values in [0,1]");
  std::string enc_input, enc_scheme = "seq-first";
  int enc_L = 1024, enc_K = 384;
  enc->add_option("--input", enc_input, "one value per line")->required();
  enc->add_option("--scheme", enc_scheme, "seq-first | embed-first");
  enc->add_option("--length", enc_L, "sequence length L");
  enc->add_option("--dims", enc_K, "embedding size K");

  // baseline
  auto* base = app.add_subcommand(
      "baseline", "Monte Carlo MSE report for a closed-form estimator");
  EvalArgs base_args;
  std::string base_estimator = "auto";
  add_eval_args(base, base_args);
  base->add_option("--estimator", base_estimator, "mle | mom | oracle | auto");

  // evaluate
  auto* ev = app.add_subcommand(
      "evaluate", "Monte Carlo MSE report for a trained transformer");
  EvalArgs ev_args;
  std::string ev_checkpoint, ev_scheme = "seq-first";
  add_eval_args(ev, ev_args);
  ev->add_option("--checkpoint", ev_checkpoint, "model checkpoint")->required();
  ev->add_option("--scheme", ev_scheme, "seq-first | embed-first");

  // train
  auto* tr = app.add_subcommand("train", "train a transformer estimator");
  TrainArgs tr_args;
  tr->add_option("--preset", tr_args.preset, "desk | paper-full");
  tr->add_option("--family", tr_args.family, "normal | exponential | beta");
  tr->add_option("--mode", tr_args.mode, "known | unknown");
  tr->add_option("--size", tr_args.size, "sample size: N or lo-hi");
  tr->add_option("--prior", tr_args.beta_prior, "beta-low | beta-wide");
  tr->add_option("--scheme", tr_args.scheme, "seq-first | embed-first");
  tr->add_option("--total", tr_args.total, "total training examples");
  tr->add_option("--batch", tr_args.batch, "batch size");
  tr->add_option("--eval-every", tr_args.eval_every,
                 "evaluation cadence in examples");
  tr->add_option("--eval-tasks", tr_args.eval_tasks, "held-out task count");
  tr->add_option("--lr", tr_args.lr, "Adam learning rate");
  tr->add_option("--seed", tr_args.seed, "run seed")->required();
  tr->add_option("--checkpoint", tr_args.checkpoint, "checkpoint path");
  tr->add_option("--curve", tr_args.curve, "loss-curve CSV path");
  tr->add_flag("--resume", tr_args.resume, "resume from checkpoint");
  tr->add_flag("--no-positional", tr_args.no_positional,
               "disable learned positional embeddings");

  // compare
  auto* cmp = app.add_subcommand(
      "compare", "two-sample t-test between two stored reports");
  std::string cmp_a, cmp_b, cmp_out;
  cmp->add_option("--a", cmp_a, "report A (json)")->required();
  cmp->add_option("--b", cmp_b, "report B (json)")->required();
  cmp->add_option("--out", cmp_out, "merged json output path");

  // ttest
  auto* tt = app.add_subcommand("ttest",
                                "two-sample t-test from summary numbers");
  double tt_mean1 = 0, tt_std1 = 0, tt_mean2 = 0, tt_std2 = 0;
  std::size_t tt_n1 = 0, tt_n2 = 0;
  tt->add_option("--mean1", tt_mean1)->required();
  tt->add_option("--std1", tt_std1)->required();
  tt->add_option("--n1", tt_n1)->required();
  tt->add_option("--mean2", tt_mean2)->required();
  tt->add_option("--std2", tt_std2)->required();
  tt->add_option("--n2", tt_n2)->required();

  try {
    app.parse(argc, argv);
    if (enc->parsed()) return cmd_encode(enc_input, enc_scheme, enc_L, enc_K);
    if (base->parsed()) return cmd_baseline(base_args, base_estimator);
    if (ev->parsed()) return cmd_evaluate(ev_args, ev_checkpoint, ev_scheme);
    if (tr->parsed()) return cmd_train(tr_args);
    if (cmp->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
    if (tt->parsed()) {
      return cmd_ttest(tt_mean1, tt_std1, tt_n1, tt_mean2, tt_std2, tt_n2);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitOk;
}
