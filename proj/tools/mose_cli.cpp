// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// mose: command-line front end. Every command writes run_manifest.txt into
// its output directory and refuses a non-empty one unless --force is given.
//
// Exit codes: 2 config, 3 data, 4 numeric divergence, 5 failed check.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mose/config.h"
#include "mose/errors.h"
#include "mose/experiments.h"
#include "mose/signals.h"
#include "mose/trainer.h"
#include "mose/verify.h"
#include "mose/wav.h"

#ifndef MOSE_VERSION
#define MOSE_VERSION "0.0.0"
#endif
#ifndef MOSE_GIT_HASH
#define MOSE_GIT_HASH "unknown"
#endif

namespace fs = std::filesystem;
using namespace mose;

namespace {

constexpr const char* kManifest = "run_manifest.txt";

struct Common {
  std::string out;
  bool force = false;
};

// Options shared by commands that build a TrainConfig.
struct ConfigOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<int> steps;
  std::optional<std::string> metric;
  std::vector<std::string> sets;

  TrainConfig build() const {
    TrainConfig c = config_path.empty() ? TrainConfig{} : TrainConfig::load(config_path);
    for (const std::string& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) c.seed = *seed;
    if (alpha) c.alpha = *alpha;
    if (steps) c.steps = *steps;
    if (metric) c.metric = *metric;
    c.validate();
    return c;
  }

  void add_to(CLI::App* app) {
    app->add_option("--config", config_path, "key=value config file");
    app->add_option("--seed", seed, "run seed");
    app->add_option("--alpha", alpha, "weight of the actor loss");
    app->add_option("--steps", steps, "diffusion steps T");
    app->add_option("--metric", metric, "reward metric");
    app->add_option("--set", sets, "extra key=value override (repeatable)");
  }
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw ConfigError("bad number '" + tok + "' in list");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::vector<std::string> split_names(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

// "" -> full reverse process, "default" -> the built-in 6-step schedule.
std::vector<double> fast_betas(const std::string& spec) {
  if (spec.empty()) return {};
  if (spec == "default") return default_fast_schedule();
  return parse_list(spec);
}

void prepare_out(const Common& c) {
  if (c.out.empty()) throw ConfigError("--out is required");
  const fs::path out(c.out);
  if (fs::exists(out) && !fs::is_empty(out)) {
    if (!c.force) {
      throw ConfigError(c.out + " exists and is not empty (use --force to overwrite)");
    }
    fs::remove_all(out);
  }
  fs::create_directories(out);
}

void write_manifest(const Common& c, const std::vector<std::string>& args,
                    const std::string& command, const TrainConfig* config) {
  std::ofstream m(fs::path(c.out) / kManifest);
  m << "tool=mose\n"
    << "version=" << MOSE_VERSION << "+" << MOSE_GIT_HASH << "\n"
    << "command=" << command << "\n";
  for (const std::string& a : args) m << "arg=" << a << "\n";
  if (config) {
    m << "seed=" << config->seed << "\n"
      << "config_hash=" << hex64(config->hash()) << "\n"
      << "[config]\n"
      << config->serialize();
  }
  if (!m) throw DataError("cannot write manifest in " + c.out);
}

std::vector<SignalPair> load_split(const std::string& dir, Split split) {
  std::vector<SignalPair> pairs = filter_split(read_corpus(dir), split);
  if (pairs.empty()) {
    throw DataError(dir + " has no " + std::string(split_name(split)) + " utterances");
  }
  return pairs;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
  if (!f) throw DataError("cannot write " + path.string());
}

// --- commands ----------------------------------------------------------------

struct SynthArgs {
  std::uint64_t seed = 1;
  int train = 32;
  int test = 16;
  int length = 512;
  std::string train_snrs = "0,5,10,15";
  std::string test_snrs = "2.5,7.5,12.5,17.5";
};

void cmd_synth(const Common& c, const SynthArgs& a) {
  CorpusOptions tr;
  tr.seed = a.seed;
  tr.utterances = a.train;
  tr.length = a.length;
  tr.snr_levels = parse_list(a.train_snrs);
  tr.split = Split::kTrain;
  CorpusOptions te = tr;
  te.utterances = a.test;
  te.snr_levels = parse_list(a.test_snrs);
  te.split = Split::kTest;
  std::vector<SignalPair> all;
  if (a.train > 0) all = synth_corpus(tr);
  if (a.test > 0) {
    const std::vector<SignalPair> t = synth_corpus(te);
    all.insert(all.end(), t.begin(), t.end());
  }
  write_corpus(c.out, all);
  std::printf("wrote %zu pairs to %s\n", all.size(), c.out.c_str());
}

struct TrainArgs {
  std::string corpus;
  std::string resume;
  std::string init_from;
  int stop_at = -1;
};

void cmd_train(const Common& c, const TrainConfig& config, const TrainArgs& a) {
  std::vector<SignalPair> corpus = load_split(a.corpus, Split::kTrain);
  if (!a.resume.empty() && !a.init_from.empty()) {
    throw ConfigError("--resume and --init-from are exclusive");
  }
  Trainer tr = !a.resume.empty()    ? Trainer::resume(a.resume, config, corpus)
               : !a.init_from.empty() ? Trainer::branch(a.init_from, config, corpus)
                                      : Trainer(config, corpus);
  const int stop = a.stop_at < 0 ? config.n_total : a.stop_at;
  tr.on_iteration = [](const Trainer& t) {
    if (t.iteration() % 250 == 0) {
      const TelemetryRow& r = t.telemetry().back();
      std::fprintf(stderr, "iter %d phase %d L1 %.4f L2 %.4f L3 %.4f\n", r.iter, r.phase,
                   r.l1, r.l2, r.l3);
    }
  };
  try {
    tr.run_until(stop);
  } catch (const NumericError&) {
    // Keep what was learned up to the failure for inspection.
    tr.save(fs::path(c.out) / "diverged");
    throw;
  }
  tr.save(fs::path(c.out) / "checkpoint");
  std::printf("iteration %d of %d saved to %s/checkpoint\n", tr.iteration(),
              config.n_total, c.out.c_str());
}

struct EnhanceArgs {
  std::string model;
  std::vector<std::string> inputs;
  std::string fast_schedule;
  bool stochastic = false;
  std::uint64_t seed = 0;
};

void cmd_enhance(const Common& c, const EnhanceArgs& a) {
  TrainConfig config;
  const ParamSet theta = load_diffusion_params(a.model, &config);
  std::vector<SignalPair> pairs;
  std::vector<std::string> names;
  for (const std::string& in : a.inputs) {
    if (fs::is_directory(in)) {
      for (SignalPair& p : load_split(in, Split::kTest)) {
        names.push_back(p.id + ".wav");
        pairs.push_back(std::move(p));
      }
      continue;
    }
    WavData w = read_wav(in);
    SignalPair p;
    p.y = w.samples;
    p.x0 = w.samples;  // unused by the sampler
    p.sample_rate = w.sample_rate;
    names.push_back(fs::path(in).filename().string());
    pairs.push_back(std::move(p));
  }
  if (pairs.empty()) throw DataError("no inputs to enhance");
  SamplerSpec sampler;
  sampler.fast_betas = fast_betas(a.fast_schedule);
  sampler.mode = a.stochastic ? NoiseMode::kStochastic : NoiseMode::kDeterministic;
  sampler.seed = a.seed;
  const std::vector<Signal> out =
      enhance_all(config.diffusion_net(), theta, config.schedule(), pairs, sampler);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (double v : out[i]) {
      if (!std::isfinite(v)) throw NumericError("non-finite output for " + names[i]);
    }
    write_wav(fs::path(c.out) / names[i], out[i], pairs[i].sample_rate);
  }
  std::printf("enhanced %zu files into %s\n", out.size(), c.out.c_str());
}

struct EvalArgs {
  std::string corpus;
  std::vector<std::string> models;  // name=dir
  std::string metrics = "si_snr,seg_snr,neg_mse";
  std::string fast_schedule;
};

void cmd_eval(const Common& c, const EvalArgs& a) {
  const std::vector<SignalPair> test = load_split(a.corpus, Split::kTest);
  SamplerSpec sampler;
  sampler.fast_betas = fast_betas(a.fast_schedule);
  std::vector<EvalSystem> systems;
  for (const std::string& m : a.models) {
    const auto eq = m.find('=');
    if (eq == std::string::npos) throw ConfigError("--model expects name=checkpoint_dir");
    TrainConfig config;
    const ParamSet theta = load_diffusion_params(m.substr(eq + 1), &config);
    EvalSystem s;
    s.name = m.substr(0, eq);
    s.alpha = config.elbo_only ? 0.0 : config.alpha;
    s.outputs = enhance_all(config.diffusion_net(), theta, config.schedule(), test, sampler);
    systems.push_back(std::move(s));
  }
  std::vector<MetricSpec> metrics;
  for (const std::string& n : split_names(a.metrics)) metrics.push_back(make_metric(n));
  std::ostringstream csv;
  write_report(csv, evaluate(test, systems, metrics));
  write_text(fs::path(c.out) / "report.csv", csv.str());
  std::cout << csv.str();
}

struct MismatchArgs {
  std::string corpus;
  std::string elbo_model;
  std::string metric_model;
  std::string reward_metric = "si_snr";
  std::string report_metric = "seg_snr";
};

void cmd_mismatch(const Common& c, const MismatchArgs& a) {
  const std::vector<SignalPair> test = load_split(a.corpus, Split::kTest);
  TrainConfig config, other;
  const ParamSet elbo = load_diffusion_params(a.elbo_model, &config);
  const ParamSet metric = load_diffusion_params(a.metric_model, &other);
  if (!(config.schedule() == other.schedule()) ||
      config.diffusion_net().manifest() != other.diffusion_net().manifest()) {
    throw ConfigError("the two checkpoints use different networks or schedules");
  }
  const MismatchReport report =
      mismatch_experiment(config.diffusion_net(), elbo, metric, config.schedule(), test,
                          make_metric(a.reward_metric), make_metric(a.report_metric));
  std::ostringstream csv;
  write_mismatch(csv, report);
  write_text(fs::path(c.out) / "mismatch.csv", csv.str());
  std::printf("corr(sum L1, dm) = %.4f  corr(R, dm) = %.4f  (%zu utterances)\n",
              report.corr_l1, report.corr_reward, report.points.size());
}

struct SweepArgs {
  std::string corpus;
  std::string alphas = "0,0.1,1,5";
  std::string seeds = "0,1,2,3,4";
  std::string metrics = "si_snr,seg_snr,neg_mse";
  std::string fast_schedule;
};

void cmd_sweep(const Common& c, const TrainConfig& config, const SweepArgs& a) {
  SweepOptions o;
  o.alphas = parse_list(a.alphas);
  o.seeds.clear();
  for (double s : parse_list(a.seeds)) {
    if (s < 0 || s != std::floor(s)) throw ConfigError("seeds must be non-negative integers");
    o.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  o.metrics = split_names(a.metrics);
  o.sampler.fast_betas = fast_betas(a.fast_schedule);
  o.work_dir = c.out;
  o.log = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
  const SweepResult r = alpha_sweep(config, load_split(a.corpus, Split::kTrain),
                                    load_split(a.corpus, Split::kTest), o);
  std::ostringstream csv;
  write_report(csv, r.rows);
  write_text(fs::path(c.out) / "report.csv", csv.str());
  std::cout << csv.str();
}

void cmd_selfcheck(bool full, const std::string& work) {
  namespace v = mose::verify;
  std::vector<v::Verdict> results = {
      v::timed(1, "schedule", 1.0, v::criterion_schedule),
      v::timed(2, "w=0 reduction", 5.0, v::criterion_reduction),
      v::timed(3, "marginal consistency", 120.0, v::criterion_marginal_consistency),
      v::timed(4, "gradients", 120.0, v::criterion_gradients),
      v::timed(5, "telescoping reward", 60.0, v::criterion_telescoping),
      v::timed(6, "phase discipline", 60.0, v::criterion_phase_discipline),
      v::timed(9, "determinism", 120.0, v::criterion_determinism),
  };
  if (full) {
    const fs::path dir = work.empty() ? fs::temp_directory_path() / "mose_selfcheck" : fs::path(work);
    fs::create_directories(dir);
    auto log = [](const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); };
    results.push_back(v::timed(7, "alpha trend", 1800.0,
                               [&] { return v::criterion_alpha_trend(dir, log); }));
    results.push_back(v::timed(8, "loss/metric mismatch", 300.0,
                               [&] { return v::criterion_mismatch(dir); }));
  }
  int passed = 0;
  for (const v::Verdict& r : results) {
    std::printf("[%s] %d %s: %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
    passed += r.pass;
  }
  std::printf("%d/%zu property groups passed\n", passed, results.size());
  if (passed != static_cast<int>(results.size())) throw CheckFailure("selfcheck failed");
}

// Reads the arg= lines of a manifest.
std::vector<std::string> manifest_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  std::vector<std::string> args;
  std::string line;
  while (std::getline(in, line)) {
    if (line == "[config]") break;
    if (line.rfind("arg=", 0) == 0) args.push_back(line.substr(4));
  }
  if (args.empty()) throw DataError(path + " records no command");
  return args;
}

int run(std::vector<std::string> args);

int run_replay(const std::string& manifest, const std::string& out, bool force) {
  std::vector<std::string> args = manifest_args(manifest);
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--out") {
      args[i + 1] = out;
      replaced = true;
    }
  }
  if (!replaced) throw DataError(manifest + " has no --out to redirect");
  if (force && std::find(args.begin(), args.end(), "--force") == args.end()) {
    args.push_back("--force");
  }
  return run(args);
}

int run(std::vector<std::string> args) {
  CLI::App app{"Metric-oriented diffusion enhancement toolkit", "mose"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(MOSE_VERSION) + "+" + MOSE_GIT_HASH);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "output directory")->required();
    sub->add_flag("--force", common.force, "overwrite a non-empty output directory");
  };

  SynthArgs synth;
  CLI::App* s_synth = app.add_subcommand("synth", "write a synthetic train/test corpus");
  add_common(s_synth);
  s_synth->add_option("--seed", synth.seed);
  s_synth->add_option("--train", synth.train, "training pairs");
  s_synth->add_option("--test", synth.test, "test pairs");
  s_synth->add_option("--length", synth.length, "samples per pair");
  s_synth->add_option("--train-snrs", synth.train_snrs);
  s_synth->add_option("--test-snrs", synth.test_snrs);

  ConfigOptions train_cfg;
  TrainArgs train;
  CLI::App* s_train = app.add_subcommand("train", "run the two-phase training loop");
  add_common(s_train);
  train_cfg.add_to(s_train);
  s_train->add_option("--corpus", train.corpus, "corpus directory")->required();
  s_train->add_option("--resume", train.resume, "continue from a checkpoint");
  s_train->add_option("--init-from", train.init_from,
                      "start the joint phase from a warm-up checkpoint at n_th");
  s_train->add_option("--stop-at", train.stop_at, "stop before this iteration");

  EnhanceArgs enhance;
  CLI::App* s_enh = app.add_subcommand("enhance", "enhance WAV files or a corpus test split");
  add_common(s_enh);
  s_enh->add_option("--model", enhance.model, "checkpoint directory")->required();
  s_enh->add_option("--fast-schedule", enhance.fast_schedule,
                    "comma-separated inference betas, or 'default'");
  s_enh->add_flag("--stochastic", enhance.stochastic, "sample z instead of the mean path");
  s_enh->add_option("--seed", enhance.seed);
  s_enh->add_option("inputs", enhance.inputs, "WAV files or corpus directories")->required();

  EvalArgs eval;
  CLI::App* s_eval = app.add_subcommand("eval", "score checkpoints on a test split");
  add_common(s_eval);
  s_eval->add_option("--corpus", eval.corpus)->required();
  s_eval->add_option("--model", eval.models, "name=checkpoint_dir (repeatable)");
  s_eval->add_option("--metric", eval.metrics, "comma-separated metric names");
  s_eval->add_option("--fast-schedule", eval.fast_schedule);

  MismatchArgs mm;
  CLI::App* s_mm = app.add_subcommand("mismatch", "loss/metric correlation experiment");
  add_common(s_mm);
  s_mm->add_option("--corpus", mm.corpus)->required();
  s_mm->add_option("--elbo-model", mm.elbo_model)->required();
  s_mm->add_option("--metric-model", mm.metric_model)->required();
  s_mm->add_option("--metric", mm.reward_metric, "reward metric");
  s_mm->add_option("--report-metric", mm.report_metric);

  ConfigOptions sweep_cfg;
  SweepArgs sweep;
  CLI::App* s_sweep = app.add_subcommand("sweep", "alpha sweep over seeds");
  add_common(s_sweep);
  sweep_cfg.add_to(s_sweep);
  s_sweep->add_option("--corpus", sweep.corpus)->required();
  s_sweep->add_option("--alphas", sweep.alphas);
  s_sweep->add_option("--seeds", sweep.seeds);
  s_sweep->add_option("--metrics", sweep.metrics);
  s_sweep->add_option("--fast-schedule", sweep.fast_schedule);

  bool full = false;
  std::string work;
  CLI::App* s_check = app.add_subcommand("selfcheck", "run the invariant and oracle suite");
  s_check->add_flag("--full", full, "include the training experiments (about 20 minutes)");
  s_check->add_option("--work", work, "directory for experiment checkpoints");

  std::string manifest;
  CLI::App* s_replay = app.add_subcommand("replay", "rerun the command recorded in a manifest");
  add_common(s_replay);
  s_replay->add_option("manifest", manifest)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (name == "selfcheck") {
    cmd_selfcheck(full, work);
    return 0;
  }
  if (name == "replay") return run_replay(manifest, common.out, common.force);

  std::optional<TrainConfig> config;
  if (name == "train") config = train_cfg.build();
  if (name == "sweep") config = sweep_cfg.build();
  if (name == "train") {
    // --force must not wipe the checkpoint being continued.
    for (const std::string& src : {train.resume, train.init_from}) {
      if (src.empty()) continue;
      const fs::path from = fs::weakly_canonical(fs::absolute(src));
      const fs::path out = fs::weakly_canonical(fs::absolute(common.out));
      const std::string rel = from.lexically_relative(out).string();
      if (rel.empty() || rel.rfind("..", 0) != 0) {
        throw ConfigError("checkpoint " + src + " lies inside --out " + common.out);
      }
    }
  }
  prepare_out(common);
  write_manifest(common, args, name, config ? &*config : nullptr);
  if (name == "synth") cmd_synth(common, synth);
  if (name == "train") cmd_train(common, *config, train);
  if (name == "enhance") cmd_enhance(common, enhance);
  if (name == "eval") cmd_eval(common, eval);
  if (name == "mismatch") cmd_mismatch(common, mm);
  if (name == "sweep") cmd_sweep(common, *config, sweep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return kExitNumeric;
  } catch (const CheckFailure& e) {
    std::fprintf(stderr, "check failed: %s\n", e.what());
    return kExitCheck;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
