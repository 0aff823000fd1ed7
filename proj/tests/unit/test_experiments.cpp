// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mose/errors.h"
#include "mose/experiments.h"
#include "mose/trainer.h"

using namespace mose;

namespace {

std::vector<SignalPair> pairs(Split split, int n) {
  CorpusOptions o;
  o.utterances = n;
  o.length = 128;
  o.split = split;
  return synth_corpus(o);
}

TrainConfig tiny() {
  TrainConfig c;
  c.n_total = 8;
  c.n_th = 4;
  c.batch = 2;
  c.d_channels = 8;
  c.d_blocks = 2;
  c.v_hidden = 16;
  c.guard_warmup = 2;
  return c;
}

}  // namespace

TEST_CASE("pearson examples") {
  const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 1, 1, 1}), DataError);
}

TEST_CASE("report rows come out in table order") {
  const auto test = pairs(Split::kTest, 4);
  EvalSystem same{"copy", 0.5, {}};
  for (const SignalPair& p : test) same.outputs.push_back(p.y);
  const std::vector<MetricSpec> m{make_metric("si_snr"), make_metric("neg_mse")};
  const auto rows = evaluate(test, {same}, m);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].system == "unprocessed");
  CHECK(!rows[0].alpha.has_value());
  CHECK(rows[2].system == "copy");
  CHECK(rows[2].mean == rows[0].mean);
  CHECK(rows[0].n == 4);
  std::ostringstream out;
  write_report(out, rows);
  CHECK(out.str().rfind(std::string(kReportHeader) + "\nunprocessed,-,si_snr,", 0) == 0);
  EvalSystem short_one{"bad", 1.0, {test[0].y}};
  CHECK_THROWS_AS(evaluate(test, {short_one}, m), DataError);
}

TEST_CASE("enhancement is ordered and reproducible") {
  const auto test = pairs(Split::kTest, 5);
  const DiffusionNet net(DiffusionNetConfig{8, 2, 3, 8, 16});
  const ParamSet theta = net.init(1, false);
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  SamplerSpec sampler;
  sampler.mode = NoiseMode::kStochastic;
  const auto a = enhance_all(net, theta, s, test, sampler);
  const auto b = enhance_all(net, theta, s, test, sampler);
  CHECK(a == b);
  CHECK_THROWS_AS(reverse_sample(net, theta, test[0].y, s, NoiseMode::kStochastic, nullptr),
                  ConfigError);
  sampler.fast_betas = default_fast_schedule();
  for (const Signal& o : enhance_all(net, theta, s, test, sampler)) {
    CHECK(o.size() == 128);
  }
}

TEST_CASE("mismatch experiment telescopes and reports both correlations") {
  const auto test = pairs(Split::kTest, 6);
  const DiffusionNet net(DiffusionNetConfig{8, 2, 3, 8, 16});
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const MismatchReport r = mismatch_experiment(net, net.init(1, false), net.init(2, false), s,
                                               test, make_metric("si_snr"),
                                               make_metric("seg_snr"));
  REQUIRE(r.points.size() == 6);
  for (const MismatchPoint& p : r.points) {
    CHECK(std::abs(p.reward_sum - p.telescoped) <= 1e-9);
    CHECK(p.sum_l1 > 0.0);
  }
  CHECK(std::abs(r.corr_l1) <= 1.0);
  CHECK(std::abs(r.corr_reward) <= 1.0);
}

TEST_CASE("alpha sweep emits a row per alpha and metric") {
  SweepOptions o;
  o.alphas = {0.0, 1.0};
  o.seeds = {0};
  o.metrics = {"si_snr", "neg_mse"};
  const SweepResult r = alpha_sweep(tiny(), pairs(Split::kTrain, 4), pairs(Split::kTest, 3), o);
  REQUIRE(r.rows.size() == 2 + 2 * 2);
  CHECK(r.rows[2].system == "elbo");
  CHECK(r.rows[4].system == "mose");
  CHECK(*r.rows[4].alpha == 1.0);
  REQUIRE(r.per_seed.size() == 2);
  CHECK(r.per_seed[0].size() == 1);
}

TEST_CASE("six-step sampling stays within 1 dB of the full chain after training") {
  TrainConfig c;
  c.n_total = c.n_th = 800;
  c.batch = 8;
  CorpusOptions o;
  o.utterances = 16;
  o.length = 256;
  Trainer tr(c, synth_corpus(o));
  tr.run();
  const auto test = pairs(Split::kTest, 8);
  SamplerSpec full, fast;
  fast.fast_betas = default_fast_schedule();
  const std::vector<MetricSpec> m{make_metric("si_snr")};
  const auto rows = evaluate(
      test,
      {{"full", std::nullopt, enhance_all(tr.diffusion_net(), tr.theta_d(), tr.schedule(), test, full)},
       {"fast", std::nullopt, enhance_all(tr.diffusion_net(), tr.theta_d(), tr.schedule(), test, fast)}},
      m);
  MESSAGE("unprocessed " << rows[0].mean << " full " << rows[1].mean << " fast " << rows[2].mean);
  CHECK(rows[1].mean > rows[0].mean);
  CHECK(std::abs(rows[2].mean - rows[1].mean) <= 1.0);
}
