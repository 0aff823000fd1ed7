// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <set>

#include "mose/errors.h"
#include "mose/nets.h"
#include "mose/nn/adam.h"
#include "mose/rng.h"
#include "mose/verify.h"

using namespace mose;

TEST_CASE("step embedding is deterministic and distinct per step") {
  std::set<std::vector<double>> seen;
  for (int t = 0; t <= 50; ++t) {
    const Eigen::VectorXd e = step_embedding(t, 16);
    CHECK(e.isApprox(step_embedding(t, 16)));
    seen.insert(std::vector<double>(e.data(), e.data() + e.size()));
  }
  CHECK(seen.size() == 51);
}

TEST_CASE("parameter count matches the manifest") {
  const DiffusionNet d;
  const ValueNet v;
  std::size_t nd = 0, nv = 0;
  for (const auto& s : d.manifest()) nd += s.size();
  for (const auto& s : v.manifest()) nv += s.size();
  CHECK(d.init(1).size() == nd);
  CHECK(v.init(1).size() == nv);
}

TEST_CASE("zero-initialised heads give zero outputs") {
  const DiffusionNet d;
  const ValueNet v;
  const ParamSet td = d.init(3);
  const ParamSet tv = v.init(3);
  Rng rng(3, 0, 0);
  const Signal x = rng.normal_vector(128), y = rng.normal_vector(128);
  for (double e : d.forward(td, x, y, 10)) CHECK(e == 0.0);
  CHECK(v.forward(tv, x, y, x, 10) == 0.0);
}

TEST_CASE("init is seeded and float-representable") {
  const DiffusionNet d;
  const ParamSet a = d.init(7), b = d.init(7), c = d.init(8);
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
  for (double w : a.values()) REQUIRE(static_cast<double>(static_cast<float>(w)) == w);
}

TEST_CASE("value net rejects inputs shorter than its receptive field") {
  const ValueNet v;
  const ParamSet tv = v.init(1);
  const Signal s(v.min_length() - 1, 0.1);
  CHECK_THROWS(v.forward(tv, s, s, s, 1));
  const Signal ok(v.min_length(), 0.1);
  CHECK_NOTHROW(v.forward(tv, ok, ok, ok, 1));
}

TEST_CASE("finite-difference agreement on every differentiable path") {
  for (std::uint64_t seed : {21u, 22u}) {
    CHECK(verify::check_l1_gradient(100, seed).worst <= verify::kGradientTolerance);
    CHECK(verify::check_actor_gradient(100, seed).worst <= verify::kGradientTolerance);
    CHECK(verify::check_bellman_gradient(100, seed).worst <= verify::kGradientTolerance);
    CHECK(verify::check_value_eps_gradient(100, seed).worst <= verify::kGradientTolerance);
  }
}

TEST_CASE("first Adam step moves each weight by about the learning rate") {
  nn::ParamSet p({{"w", 1, 4}});
  for (double& v : p.values()) v = 0.5;
  const double g[] = {0.3, -2.0, 1e-3, 0.0};
  std::copy(std::begin(g), std::end(g), p.grads().begin());
  nn::Adam adam(p.size());
  adam.step(p, 1e-2);
  CHECK(p.values()[0] == doctest::Approx(0.49).epsilon(1e-5));
  CHECK(p.values()[1] == doctest::Approx(0.51).epsilon(1e-5));
  CHECK(p.values()[2] == doctest::Approx(0.49).epsilon(1e-4));
  CHECK(p.values()[3] == 0.5);
  for (double v : p.grads()) CHECK(v == 0.0);
  CHECK(adam.steps() == 1);
}

TEST_CASE("Adam refuses non-finite gradients without touching state") {
  nn::ParamSet p({{"w", 1, 2}});
  p.grads()[0] = std::nan("");
  nn::Adam adam(p.size());
  CHECK_THROWS_AS(adam.step(p, 1e-2), NumericError);
  CHECK(p.values()[0] == 0.0);
  CHECK(adam.steps() == 0);
}
