// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "mose/diffusion.h"
#include "mose/errors.h"
#include "mose/rl.h"
#include "mose/rng.h"
#include "mose/signals.h"

using namespace mose;

namespace {

struct Nets {
  DiffusionNet d{DiffusionNetConfig{8, 2, 3, 8, 16}};
  ValueNet v{ValueNetConfig{{4, 8, 8}, 4, 2, 16, false, 8}};
  ParamSet td = d.init(1, false);
  ParamSet tv = v.init(2, false);
};

}  // namespace

TEST_CASE("reward examples") {
  const MetricSpec mse = make_metric("neg_mse");
  const Signal x0{0.5, -0.5, 1.0, 0.0};
  const Signal e{0.1, 0.2, -0.3, 0.4};
  LatentState cur{x0, 5}, prev{x0, 4};
  for (std::size_t i = 0; i < e.size(); ++i) cur.x[i] += e[i];
  CHECK(reward(cur, cur, x0, mse) == 0.0);
  CHECK(reward(prev, cur, x0, mse) == doctest::Approx((0.01 + 0.04 + 0.09 + 0.16) / 4));
}

TEST_CASE("rewards ignore a constant offset in the metric") {
  MetricSpec shifted = make_metric("si_snr");
  const MetricSpec plain = make_metric("si_snr");
  shifted.evaluate = [](std::span<const double> c, std::span<const double> r) {
    return si_snr(c, r) + 7.25;
  };
  Rng rng(3, 0, 0);
  const Signal x0 = rng.normal_vector(64);
  const LatentState a{rng.normal_vector(64), 3}, b{rng.normal_vector(64), 2};
  CHECK(reward(b, a, x0, shifted) == doctest::Approx(reward(b, a, x0, plain)).epsilon(1e-12));
}

TEST_CASE("transition validation") {
  Transition tr{{Signal(4, 0.0), 3}, Signal(4, 0.0), {Signal(4, 0.0), 2}, 0.1, 3};
  CHECK_NOTHROW(validate(tr));
  tr.to.t = 1;
  CHECK_THROWS_AS(validate(tr), DataError);
  tr.to.t = 2;
  tr.reward = std::nan("");
  CHECK_THROWS_AS(validate(tr), DataError);
}

TEST_CASE("critic target conventions and recomposition") {
  Nets n;
  Rng rng(4, 0, 0);
  const Signal y = rng.normal_vector(64), x0 = rng.normal_vector(64);
  const LatentState mid{rng.normal_vector(64), 7};
  const LatentState last{rng.normal_vector(64), 0};
  CHECK(critic_target(0.3, 0.0, n.v, n.tv, n.d, n.td, mid, y, x0) == 0.3);
  CHECK(critic_target(0.3, 0.95, n.v, n.tv, n.d, n.td, last, y, x0) == 0.3);
  const Signal a = n.d.forward(n.td, mid.x, y, mid.t);
  const double expected = 0.3 + 0.95 * n.v.forward(n.tv, mid.x, a, x0, mid.t);
  CHECK(std::abs(critic_target(0.3, 0.95, n.v, n.tv, n.d, n.td, mid, y, x0) - expected) <= 1e-12);
}

TEST_CASE("zero value head contributes nothing to the actor") {
  const ValueNet v;
  const ParamSet tv = v.init(5);
  Rng rng(5, 0, 0);
  const Signal x = rng.normal_vector(128), e = rng.normal_vector(128);
  const ActorTerm t = actor_loss(v, tv, x, e, x, 3);
  CHECK(t.loss == 0.0);
  for (double g : t.eps_grad) CHECK(g == 0.0);
}

TEST_CASE("actor loss leaves the critic parameters alone") {
  Nets n;
  Rng rng(6, 0, 0);
  const Signal x = rng.normal_vector(64), e = rng.normal_vector(64);
  const std::uint64_t before = n.tv.hash();
  const ActorTerm t = actor_loss(n.v, n.tv, x, e, x, 3);
  CHECK(t.loss == -n.v.forward(n.tv, x, e, x, 3));
  CHECK(n.tv.hash() == before);
  for (double g : n.tv.grads()) CHECK(g == 0.0);
}

TEST_CASE("one small step on the Bellman loss lowers it") {
  Nets n;
  Rng rng(7, 0, 0);
  const Signal x = rng.normal_vector(64), e = rng.normal_vector(64), x0 = rng.normal_vector(64);
  const double target = 1.5;
  const double before = bellman_loss(n.v, n.tv, x, e, x0, 4, target);
  n.tv.zero_grad();
  bellman_loss(n.v, n.tv, x, e, x0, 4, target, n.tv.grads());
  auto vals = n.tv.values();
  auto grads = n.tv.grads();
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] -= 1e-4 * grads[i];
  CHECK(bellman_loss(n.v, n.tv, x, e, x0, 4, target) < before);
  const double v = n.v.forward(n.tv, x, e, x0, 4);
  CHECK(bellman_loss(n.v, n.tv, x, e, x0, 4, v) == 0.0);
}

TEST_CASE("oracle mean-path denoising improves MSE on average") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  const MetricSpec mse = make_metric("neg_mse");
  CorpusOptions o;
  o.utterances = 100;
  o.length = 64;
  double total = 0.0;
  Rng rng(8, 0, 0);
  for (const SignalPair& p : synth_corpus(o)) {
    LatentState x{Signal(p.length()), 50};
    const Signal eps = rng.normal_vector(p.length());
    x = forward_sample(p, 50, eps, s);
    while (x.t > 0) {
      const Signal c = implied_target(x.x, p.x0, s.marginal(x.t));
      const LatentState prev = reverse_step(x, p.y, c, rng.normal_vector(p.length()), s);
      total += reward(prev, x, p.x0, mse);
      x = prev;
    }
  }
  CHECK(total / 100.0 >= 0.0);
}
