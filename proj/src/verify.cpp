// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/verify.h"

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "mose/diffusion.h"
#include "mose/errors.h"
#include "mose/rl.h"
#include "mose/rng.h"
#include "mose/trainer.h"

namespace mose::verify {

namespace {

using Dec50 = boost::multiprecision::cpp_dec_float_50;

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size_bytes()) == 0;
}

Verdict verdict(bool pass, std::string detail) {
  Verdict v;
  v.pass = pass;
  v.detail = std::move(detail);
  return v;
}

// Linear beta ramp evaluated in decimal arithmetic from the same double
// endpoints.
std::vector<Dec50> dec_betas(int steps, double beta_min, double beta_max) {
  std::vector<Dec50> betas(steps + 1);
  for (int t = 1; t <= steps; ++t) {
    const Dec50 f = Dec50(t - 1) / Dec50(steps - 1);
    betas[t] = Dec50(beta_min) * (1 - f) + Dec50(beta_max) * f;
  }
  return betas;
}

// Small network pair and inputs shared by the gradient checks.
struct GradFixture {
  DiffusionNet dnet;
  ValueNet vnet;
  ParamSet theta_d;
  ParamSet theta_v;
  SignalPair pair;
  LatentState x_t;
  Signal target;
  NoiseSchedule schedule;

  explicit GradFixture(std::uint64_t seed, int length = 128)
      : dnet(DiffusionNetConfig{8, 3, 3, 8, 16}),
        vnet(ValueNetConfig{{4, 8, 8}, 4, 2, 16, true, 8}),
        schedule(build_schedule(50, 1e-4, 0.035)) {
    theta_d = dnet.init(seed, false);
    theta_v = vnet.init(seed + 1, false);
    CorpusOptions co;
    co.seed = seed;
    co.utterances = 1;
    co.length = length;
    pair = synth_corpus(co)[0];
    Rng rng(seed, 0, 0x67726164);
    const int t = rng.uniform_int(2, schedule.steps());
    const Signal eps = rng.normal_vector(pair.x0.size());
    x_t = forward_sample(pair, t, eps, schedule);
    target = target_noise(pair, eps, t, schedule);
  }
};

constexpr double kStep = 1e-5;
// Coordinates whose gradient is far below the largest one are compared
// against this fraction of the largest instead of their own magnitude;
// central differences there are dominated by roundoff in the loss.
constexpr double kFloorFraction = 1e-3;

// Compares analytic gradients with central differences of `loss` on
// `coords` random coordinates of `values`.
GradientReport compare(std::span<double> values, std::span<const double> analytic,
                       const std::function<double()>& loss, int coords,
                       std::uint64_t seed) {
  GradientReport report;
  double largest = 0.0;
  for (double g : analytic) largest = std::max(largest, std::abs(g));
  const double floor = std::max(kFloorFraction * largest, 1e-300);
  Rng rng(seed, 1, 0x6664);
  for (int k = 0; k < coords; ++k) {
    const int i = rng.uniform_int(0, static_cast<int>(values.size()) - 1);
    const double saved = values[i];
    values[i] = saved + kStep;
    const double up = loss();
    values[i] = saved - kStep;
    const double down = loss();
    values[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    report.worst =
        std::max(report.worst, relative_error(analytic[i], numeric, floor));
    ++report.checked;
  }
  return report;
}

std::vector<SignalPair> small_corpus(std::uint64_t seed, int n, int length) {
  CorpusOptions co;
  co.seed = seed;
  co.utterances = n;
  co.length = length;
  return synth_corpus(co);
}

TrainConfig small_config() {
  TrainConfig c;
  c.n_total = 50;
  c.n_th = 25;
  c.batch = 2;
  c.d_channels = 8;
  c.d_blocks = 2;
  c.v_hidden = 16;
  c.guard_warmup = 5;
  return c;
}

}  // namespace

double alpha_bar_oracle(int steps, double beta_min, double beta_max) {
  const std::vector<Dec50> betas = dec_betas(steps, beta_min, beta_max);
  Dec50 ab = 1;
  for (int t = 1; t <= steps; ++t) ab *= 1 - betas[t];
  return ab.convert_to<double>();
}

int first_full_weight_oracle(int steps, double beta_min, double beta_max) {
  const std::vector<Dec50> betas = dec_betas(steps, beta_min, beta_max);
  Dec50 ab = 1;
  for (int t = 1; t <= steps; ++t) {
    ab *= 1 - betas[t];
    const Dec50 raw = sqrt((1 - ab) / sqrt(ab));
    if (raw >= 1) return t;
  }
  return steps;
}

double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

GradientReport check_l1_gradient(int coords, std::uint64_t seed) {
  GradFixture f(seed);
  auto loss = [&] {
    return elbo_loss(f.dnet.forward(f.theta_d, f.x_t.x, f.pair.y, f.x_t.t), f.target);
  };
  DiffusionNet::Pass pass = f.dnet.run(f.theta_d, f.x_t.x, f.pair.y, f.x_t.t);
  std::vector<double> g(f.target.size());
  elbo_loss(pass.output(), f.target, g);
  f.theta_d.zero_grad();
  pass.backward(g, f.theta_d.grads());
  const std::vector<double> analytic(f.theta_d.grads().begin(), f.theta_d.grads().end());
  return compare(f.theta_d.values(), analytic, loss, coords, seed);
}

GradientReport check_actor_gradient(int coords, std::uint64_t seed) {
  GradFixture f(seed);
  const double step = f.x_t.t;
  auto loss = [&] {
    const auto eps_hat = f.dnet.forward(f.theta_d, f.x_t.x, f.pair.y, step);
    return -f.vnet.forward(f.theta_v, f.x_t.x, eps_hat, f.pair.x0, step);
  };
  DiffusionNet::Pass pass = f.dnet.run(f.theta_d, f.x_t.x, f.pair.y, step);
  const ActorTerm actor =
      actor_loss(f.vnet, f.theta_v, f.x_t.x, pass.output(), f.pair.x0, step);
  f.theta_d.zero_grad();
  pass.backward(actor.eps_grad, f.theta_d.grads());
  const std::vector<double> analytic(f.theta_d.grads().begin(), f.theta_d.grads().end());
  return compare(f.theta_d.values(), analytic, loss, coords, seed);
}

GradientReport check_bellman_gradient(int coords, std::uint64_t seed) {
  GradFixture f(seed);
  const double step = f.x_t.t;
  const double target = 0.75;
  auto loss = [&] {
    return bellman_loss(f.vnet, f.theta_v, f.x_t.x, f.target, f.pair.x0, step, target);
  };
  f.theta_v.zero_grad();
  bellman_loss(f.vnet, f.theta_v, f.x_t.x, f.target, f.pair.x0, step, target,
               f.theta_v.grads());
  const std::vector<double> analytic(f.theta_v.grads().begin(), f.theta_v.grads().end());
  return compare(f.theta_v.values(), analytic, loss, coords, seed);
}

GradientReport check_value_eps_gradient(int coords, std::uint64_t seed) {
  GradFixture f(seed);
  const double step = f.x_t.t;
  Signal eps = f.target;
  auto loss = [&] { return f.vnet.forward(f.theta_v, f.x_t.x, eps, f.pair.x0, step); };
  ValueNet::Pass pass = f.vnet.run(f.theta_v, f.x_t.x, eps, f.pair.x0, step);
  pass.backward(1.0, {});
  const std::vector<double> analytic = pass.eps_grad();
  return compare(eps, analytic, loss, coords, seed);
}

Verdict timed(int id, const std::string& name, double budget_seconds,
              const std::function<Verdict()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v = verdict(false, std::string("exception: ") + e.what());
  }
  v.id = id;
  v.name = name;
  v.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  v.budget_seconds = budget_seconds;
  if (v.pass && v.seconds > budget_seconds) {
    v.pass = false;
    v.detail += "; over the time budget";
  }
  return v;
}

// --- 1 ---------------------------------------------------------------------

Verdict criterion_schedule() {
  constexpr int kSteps = 50;
  constexpr double kBetaMin = 1e-4, kBetaMax = 0.035;
  constexpr double kOracleTolerance = 1e-12;
  const NoiseSchedule s = build_schedule(kSteps, kBetaMin, kBetaMax);
  std::vector<std::string> failures;
  if (s.beta(1) != kBetaMin || s.beta(kSteps) != kBetaMax) {
    failures.push_back("beta endpoints");
  }
  for (int t = 1; t <= kSteps; ++t) {
    if (!(s.beta(t) > 0.0 && s.beta(t) < 1.0)) failures.push_back("beta range");
    if (!(s.alpha_bar(t) < s.alpha_bar(t - 1))) failures.push_back("alpha_bar order");
    if (!(s.delta(t) >= 0.0)) failures.push_back("delta sign");
    if (s.w(t) < s.w(t - 1) || s.w(t) < 0.0 || s.w(t) > 1.0) {
      failures.push_back("w monotone");
    }
    const double total = s.delta(t) + s.w(t) * s.w(t) * s.alpha_bar(t) +
                         s.alpha_bar(t) * (1.0 - s.w(t)) * (1.0 - s.w(t));
    if (total > 1.0 + 1e-9) failures.push_back("variance bound");
    if (t >= 2) {
      const double bt = (1.0 - s.alpha_bar(t - 1)) / (1.0 - s.alpha_bar(t)) * s.beta(t);
      if (relative_error(bt, s.beta_tilde(t), 1e-300) > 1e-15) {
        failures.push_back("beta_tilde");
      }
    }
  }
  const double oracle_T = alpha_bar_oracle(kSteps, kBetaMin, kBetaMax);
  const double err_T = std::abs(s.alpha_bar(kSteps) - oracle_T);
  if (err_T > kOracleTolerance) failures.push_back("alpha_bar_T vs oracle");
  if (s.w(kSteps) != 1.0) failures.push_back("w_T != 1");
  int first_full = kSteps + 1;
  for (int t = 1; t <= kSteps && first_full > kSteps; ++t) {
    if (s.w(t) == 1.0) first_full = t;
  }
  const int oracle_first = first_full_weight_oracle(kSteps, kBetaMin, kBetaMax);
  if (first_full != oracle_first) failures.push_back("first full weight");
  if (!(NoiseSchedule::parse(s.dump()) == s)) failures.push_back("dump round trip");

  std::string detail = "abar_T=" + fmt("%.17g", s.alpha_bar(kSteps)) +
                       " |err|=" + fmt("%.2e", err_T) +
                       " first t with w=1: " + std::to_string(first_full) +
                       " (oracle " + std::to_string(oracle_first) + ")";
  if (!failures.empty()) detail += "; failed: " + failures.front();
  return verdict(failures.empty(), detail);
}

// --- 2 ---------------------------------------------------------------------

Verdict criterion_reduction() {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035, WeightRule::kZero);
  constexpr int kCases = 100;
  constexpr int kLength = 64;
  int mismatches = 0;
  for (int c = 0; c < kCases; ++c) {
    Rng rng(2024, c, 0x726564);
    const int t = rng.uniform_int(1, s.steps());
    SignalPair pair;
    pair.x0 = rng.normal_vector(kLength);
    pair.y = rng.normal_vector(kLength);
    const Signal eps = rng.normal_vector(kLength);
    const Signal eps_hat = rng.normal_vector(kLength);
    const Signal z = rng.normal_vector(kLength);

    // Unconditional process written out directly.
    const double ab = s.alpha_bar(t);
    const double sqrt_alpha = std::sqrt(1.0 - s.beta(t));
    const double c_x = 1.0 / sqrt_alpha;
    const double c_e = s.beta(t) / (sqrt_alpha * std::sqrt(1.0 - ab));
    const double var = (1.0 - s.alpha_bar(t - 1)) / (1.0 - ab) * s.beta(t);
    Signal x_ref(kLength), x_prev_ref(kLength);
    for (int i = 0; i < kLength; ++i) {
      x_ref[i] = std::sqrt(ab) * pair.x0[i] + std::sqrt(1.0 - ab) * eps[i];
    }
    for (int i = 0; i < kLength; ++i) {
      x_prev_ref[i] = c_x * x_ref[i] - c_e * eps_hat[i];
      if (t > 1) x_prev_ref[i] += std::sqrt(var) * z[i];
    }

    const LatentState x = forward_sample(pair, t, eps, s);
    const Signal target = target_noise(pair, eps, t, s);
    const LatentState x_prev = reverse_step(x, pair.y, eps_hat, z, s);
    if (!same_bits(x.x, x_ref) || !same_bits(target, eps) ||
        !same_bits(x_prev.x, x_prev_ref) || !same_bits(s.delta(t), 1.0 - ab)) {
      ++mismatches;
    }
  }
  return verdict(mismatches == 0, std::to_string(kCases - mismatches) + "/" +
                                      std::to_string(kCases) +
                                      " cases bit-identical");
}

// --- 3 ---------------------------------------------------------------------

Verdict criterion_marginal_consistency() {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  constexpr int kDraws = 100000;
  constexpr double kSigmas = 4.0;
  const int steps[] = {2, 10, 25, 49};
  const double x0_value = 0.3, y_value = -0.45;
  bool pass = true;
  std::string detail;
  for (int t : steps) {
    Rng rng(7, t, 0x6d63);
    SignalPair pair;
    pair.x0.assign(kDraws, x0_value);
    pair.y.assign(kDraws, y_value);
    const Signal eps = rng.normal_vector(kDraws);
    const Signal z = rng.normal_vector(kDraws);
    const LatentState x = forward_sample(pair, t, eps, s);
    const Signal oracle_eps = target_noise(pair, eps, t, s);
    const LatentState prev = reverse_step(x, pair.y, oracle_eps, z, s);

    double mean = 0.0;
    for (double v : prev.x) mean += v;
    mean /= kDraws;
    double var = 0.0;
    for (double v : prev.x) var += (v - mean) * (v - mean);
    var /= kDraws - 1;

    const MarginalParams m = s.marginal(t - 1);
    const double want_mean = m.clean_gain() * x0_value + m.noisy_gain() * y_value;
    const double want_var = m.delta;
    const double se_mean = std::sqrt(want_var / kDraws);
    const double se_var = want_var * std::sqrt(2.0 / (kDraws - 1));
    const double z_mean = (mean - want_mean) / se_mean;
    const double z_var = (var - want_var) / se_var;
    if (std::abs(z_mean) > kSigmas || std::abs(z_var) > kSigmas) pass = false;
    detail += "t=" + std::to_string(t) + ":(" + fmt("%+.2f", z_mean) + "," +
              fmt("%+.2f", z_var) + ")se ";
  }
  return verdict(pass, detail);
}

// --- 4 ---------------------------------------------------------------------

Verdict criterion_gradients() {
  constexpr int kCoords = 100;
  struct Row {
    const char* name;
    GradientReport r;
  };
  const Row rows[] = {
      {"L1/theta_d", check_l1_gradient(kCoords, 11)},
      {"L2/theta_d", check_actor_gradient(kCoords, 12)},
      {"L3/theta_v", check_bellman_gradient(kCoords, 13)},
      {"V/eps", check_value_eps_gradient(kCoords, 14)},
  };
  bool pass = true;
  std::string detail;
  for (const Row& row : rows) {
    if (row.r.checked < kCoords || !(row.r.worst <= kGradientTolerance)) pass = false;
    detail += std::string(row.name) + " " + fmt("%.1e", row.r.worst) + " ";
  }
  return verdict(pass, detail + "(worst relative error, " +
                           std::to_string(kCoords) + " coords each)");
}

// --- 5 ---------------------------------------------------------------------

Verdict criterion_telescoping() {
  constexpr int kRollouts = 100;
  constexpr double kTolerance = 1e-9;
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const DiffusionNet net(DiffusionNetConfig{8, 2, 3, 8, 16});
  const ParamSet theta = net.init(5, false);
  const MetricSpec metric = make_metric("si_snr");
  const std::vector<SignalPair> pairs = small_corpus(99, kRollouts, 64);
  double worst = 0.0;
  for (const SignalPair& p : pairs) {
    double total = 0.0;
    double initial = 0.0;
    bool first = true;
    const Signal out = reverse_sample(
        net, theta, p.y, s, NoiseMode::kDeterministic, nullptr,
        [&](const LatentState& from, const LatentState& to, std::span<const double>) {
          if (first) initial = metric(from.x, p.x0);
          first = false;
          total += reward(to, from, p.x0, metric);
        });
    worst = std::max(worst, std::abs(total - (metric(out, p.x0) - initial)));
  }
  return verdict(worst <= kTolerance,
                 std::to_string(kRollouts) + " rollouts, max |R - (m_final - m_T)| = " +
                     fmt("%.2e", worst));
}

// --- 6 ---------------------------------------------------------------------

Verdict criterion_phase_discipline() {
  const std::vector<SignalPair> corpus = small_corpus(3, 8, 128);
  TrainConfig joint = small_config();
  joint.alpha = 0.0;
  TrainConfig elbo = joint;
  elbo.elbo_only = true;

  Trainer a(joint, corpus);
  Trainer b(elbo, corpus);
  const std::uint64_t v0 = a.theta_v().hash();
  int v_changed_early = 0, d_mismatch = 0;
  bool v_moved_later = false;
  while (!a.done()) {
    a.step();
    b.step();
    const bool phase1 = a.iteration() <= joint.n_th;  // iteration just run < n_th
    if (phase1 && a.theta_v().hash() != v0) ++v_changed_early;
    if (!phase1 && a.theta_v().hash() != v0) v_moved_later = true;
    if (!same_bits(a.theta_d().values(), b.theta_d().values())) ++d_mismatch;
  }
  // The same discipline with a non-zero alpha.
  TrainConfig weighted = joint;
  weighted.alpha = 1.0;
  Trainer c(weighted, corpus);
  const std::uint64_t c0 = c.theta_v().hash();
  c.run_until(weighted.n_th);
  if (c.theta_v().hash() != c0) ++v_changed_early;

  const bool pass = v_changed_early == 0 && d_mismatch == 0 && v_moved_later;
  return verdict(pass, "V changed before n_th: " + std::to_string(v_changed_early) +
                           "x; alpha=0 vs L1-only theta_d mismatches: " +
                           std::to_string(d_mismatch) + "/" +
                           std::to_string(joint.n_total) +
                           (v_moved_later ? "; V trains after n_th" : "; V never trained"));
}

// --- 7 ---------------------------------------------------------------------

TrainConfig trend_config() {
  TrainConfig c;
  c.n_total = 1500;
  c.n_th = 1000;
  c.batch = 8;
  return c;
}

std::vector<SignalPair> trend_train_corpus() {
  CorpusOptions co;
  co.seed = 1;
  co.utterances = 32;
  co.length = 512;
  co.snr_levels = {0.0, 5.0, 10.0, 15.0};
  co.split = Split::kTrain;
  return synth_corpus(co);
}

std::vector<SignalPair> trend_test_corpus() {
  CorpusOptions co;
  co.seed = 1;
  co.utterances = 16;
  co.length = 512;
  co.snr_levels = {2.5, 7.5, 12.5, 17.5};
  co.split = Split::kTest;
  return synth_corpus(co);
}

SweepOptions trend_sweep_options() {
  SweepOptions o;
  o.alphas = {0.0, 0.1, 1.0, 5.0};
  o.seeds = {0, 1, 2, 3, 4};
  o.metrics = {"si_snr", "seg_snr", "neg_mse"};
  o.sampler.mode = NoiseMode::kDeterministic;
  return o;
}

Verdict criterion_alpha_trend(const std::filesystem::path& work_dir,
                              const std::function<void(const std::string&)>& log) {
  SweepOptions options = trend_sweep_options();
  options.work_dir = work_dir;
  options.log = log;
  const SweepResult result =
      alpha_sweep(trend_config(), trend_train_corpus(), trend_test_corpus(), options);
  {
    std::ofstream out(work_dir / "alpha_sweep.csv");
    write_report(out, result.rows);
  }
  auto mean_of = [&](double alpha) {
    for (std::size_t a = 0; a < options.alphas.size(); ++a) {
      if (options.alphas[a] == alpha) {
        double m = 0.0;
        for (double v : result.per_seed[a]) m += v;
        return m / static_cast<double>(result.per_seed[a].size());
      }
    }
    throw CheckFailure("alpha missing from sweep");
  };
  const double base = mean_of(0.0);
  const double weighted = mean_of(1.0);
  std::size_t table_rows = 0;
  for (const ReportRow& r : result.rows) table_rows += r.alpha.has_value();
  const bool shape_ok =
      table_rows == options.alphas.size() * options.metrics.size();
  std::string detail = "mean test SI-SNR alpha=1 " + fmt("%.3f", weighted) +
                       " dB vs alpha=0 " + fmt("%.3f", base) + " dB over " +
                       std::to_string(options.seeds.size()) + " seeds; table " +
                       std::to_string(result.rows.size()) + " rows";
  return verdict(weighted >= base && shape_ok, detail);
}

// --- 8 ---------------------------------------------------------------------

Verdict criterion_mismatch(const std::filesystem::path& work_dir) {
  TrainConfig config;
  const ParamSet elbo = load_diffusion_params(work_dir / "seed0" / "alpha_0", &config);
  const ParamSet metric = load_diffusion_params(work_dir / "seed0" / "alpha_1");
  const std::vector<SignalPair> test = trend_test_corpus();
  const MismatchReport report =
      mismatch_experiment(config.diffusion_net(), elbo, metric, config.schedule(),
                          test, make_metric("si_snr"), make_metric("seg_snr"));
  {
    std::ofstream out(work_dir / "mismatch.csv");
    write_mismatch(out, report);
  }
  double worst = 0.0;
  for (const MismatchPoint& p : report.points) {
    worst = std::max(worst, std::abs(p.reward_sum - p.telescoped));
  }
  const bool pass = test.size() >= 10 && report.corr_reward > report.corr_l1 &&
                    worst <= 1e-9;
  return verdict(pass, "corr(R, dm)=" + fmt("%.3f", report.corr_reward) +
                           " corr(sum L1, dm)=" + fmt("%.3f", report.corr_l1) +
                           " over " + std::to_string(test.size()) + " utterances");
}

// --- 9 ---------------------------------------------------------------------

Verdict criterion_determinism() {
  const std::vector<SignalPair> corpus = small_corpus(4, 8, 128);
  TrainConfig config = small_config();
  config.n_total = 40;
  config.n_th = 20;
  config.alpha = 1.0;

  Trainer straight(config, corpus);
  straight.run();

  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("mose_replay_" + hex64(config.hash()) + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  Trainer first(config, corpus);
  first.run_until(13);
  first.save(dir / "a");
  Trainer second = Trainer::resume(dir / "a", config, corpus);
  second.run_until(31);
  second.save(dir / "b");
  Trainer third = Trainer::resume(dir / "b", config, corpus);
  third.run();

  // Replay from the configuration text alone.
  std::ostringstream text;
  text << straight.config().serialize();
  Trainer replay(TrainConfig::parse(text.str()), corpus);
  replay.run();
  std::filesystem::remove_all(dir);

  auto same = [&](const Trainer& x) {
    return x.telemetry() == straight.telemetry() &&
           same_bits(x.theta_d().values(), straight.theta_d().values()) &&
           same_bits(x.theta_v().values(), straight.theta_v().values());
  };
  const bool resumed_ok = same(third);
  const bool replay_ok = same(replay);
  return verdict(resumed_ok && replay_ok,
                 std::string("resumed run ") + (resumed_ok ? "identical" : "DIFFERS") +
                     ", replay from config " + (replay_ok ? "identical" : "DIFFERS") +
                     " (" + std::to_string(straight.telemetry().size()) +
                     " telemetry rows)");
}

}  // namespace mose::verify
