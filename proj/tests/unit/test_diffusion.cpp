// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "mose/diffusion.h"
#include "mose/errors.h"
#include "mose/rng.h"
#include "mose/signals.h"

using namespace mose;

namespace {

double rel_l2(std::span<const double> a, std::span<const double> b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

SignalPair test_pair(std::uint64_t seed, int length = 512) {
  CorpusOptions o;
  o.seed = seed;
  o.utterances = 1;
  o.length = length;
  o.snr_levels = {5.0};
  return synth_corpus(o)[0];
}

}  // namespace

TEST_CASE("forward sample and target are consistent") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const SignalPair p = test_pair(1);
  Rng rng(1, 0, 0);
  const Signal eps = rng.normal_vector(p.length());
  for (int t : {1, 17, 50}) {
    const LatentState x = forward_sample(p, t, eps, s);
    CHECK(x.t == t);
    const Signal c = target_noise(p, eps, t, s);
    const Signal implied = implied_target(x.x, p.x0, s.marginal(t));
    for (std::size_t i = 0; i < c.size(); ++i) {
      REQUIRE(implied[i] == doctest::Approx(c[i]).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(forward_sample(p, 0, eps, s), DataError);
  CHECK_THROWS_AS(forward_sample(p, 51, eps, s), DataError);
}

TEST_CASE("L1 loss value and subgradient") {
  const Signal a{1.0, -2.0, 0.5, 0.0};
  const Signal b{0.0, 0.0, 0.5, 1.0};
  std::vector<double> g(4);
  CHECK(elbo_loss(a, b, g) == doctest::Approx((1.0 + 2.0 + 0.0 + 1.0) / 4.0));
  CHECK(g[0] == 0.25);
  CHECK(g[1] == -0.25);
  CHECK(g[2] == 0.0);
  CHECK(g[3] == -0.25);
  CHECK(elbo_loss(b, b) == 0.0);
}

TEST_CASE("oracle noise recovers the clean signal along the mean path") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const SignalPair p = test_pair(2);
  const MarginalParams top = s.marginal(50);
  LatentState x{Signal(p.length()), 50};
  for (std::size_t i = 0; i < x.x.size(); ++i) x.x[i] = top.noisy_gain() * p.y[i];
  while (x.t > 0) {
    const Signal c = implied_target(x.x, p.x0, s.marginal(x.t));
    x = reverse_step(x, p.y, c, {}, s);
  }
  CHECK(rel_l2(x.x, p.x0) <= 0.1);
}

TEST_CASE("last reverse step ignores the noise draw") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  Rng rng(4, 0, 0);
  const LatentState x{rng.normal_vector(64), 1};
  const Signal y = rng.normal_vector(64), e = rng.normal_vector(64);
  const LatentState a = reverse_step(x, y, e, rng.normal_vector(64), s);
  const LatentState b = reverse_step(x, y, e, {}, s);
  CHECK(a.t == 0);
  CHECK(a.x == b.x);
}

TEST_CASE("aligning the training betas gives back every training step") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const std::vector<double> betas(s.betas().begin() + 1, s.betas().end());
  const InferenceSchedule chain = align_inference_schedule(betas, s);
  REQUIRE(chain.length() == 50);
  for (int k = 1; k <= 50; ++k) {
    const AlignedStep& st = chain.steps[k];
    CHECK(st.step == k);
    CHECK(st.marginal.alpha_bar == s.alpha_bar(k));
    CHECK(st.marginal.w == s.w(k));
    CHECK(st.marginal.delta == s.delta(k));
    const ReverseCoefficients ref = reverse_coefficients(k, s);
    CHECK(std::memcmp(&ref, &st.coefficients, sizeof ref) == 0);
  }
}

TEST_CASE("fast schedule lands on fractional steps in range") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const InferenceSchedule chain = align_inference_schedule(default_fast_schedule(), s);
  REQUIRE(chain.length() == 6);
  for (int k = 1; k <= 6; ++k) {
    CHECK(chain.steps[k].step > chain.steps[k - 1].step);
    CHECK(chain.steps[k].step <= 50.0);
    CHECK(chain.steps[k].marginal.delta >= 0.0);
  }
  // Noise beyond the training range cannot be aligned.
  CHECK_THROWS_AS(align_inference_schedule(std::vector<double>{0.5, 0.5}, s), ConfigError);
}

TEST_CASE("full and fast samplers keep the input shape") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const DiffusionNet net(DiffusionNetConfig{8, 2, 3, 8, 16});
  const ParamSet theta = net.init(1, false);
  const SignalPair p = test_pair(3, 256);
  Rng rng(1, 0, 0);
  const Signal full = reverse_sample(net, theta, p.y, s, NoiseMode::kStochastic, &rng);
  const InferenceSchedule chain = align_inference_schedule(default_fast_schedule(), s);
  const Signal fast = fast_sample(net, theta, p.y, chain, NoiseMode::kDeterministic);
  CHECK(full.size() == p.y.size());
  CHECK(fast.size() == p.y.size());
  for (double v : full) REQUIRE(std::isfinite(v));
  for (double v : fast) REQUIRE(std::isfinite(v));
  // Same chain through the generic path matches reverse_sample exactly.
  const std::vector<double> betas(s.betas().begin() + 1, s.betas().end());
  const InferenceSchedule same = align_inference_schedule(betas, s);
  CHECK(fast_sample(net, theta, p.y, same, NoiseMode::kDeterministic) ==
        reverse_sample(net, theta, p.y, s, NoiseMode::kDeterministic));
}
