// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "mose/errors.h"
#include "mose/rng.h"
#include "mose/schedule.h"
#include "mose/verify.h"

using namespace mose;

namespace {
// alpha_bar_50 of the 1e-4..0.035 ramp, multiplied out with mpmath at 50
// digits.
constexpr double kAlphaBar50 = 0.41146639796184525534;
}  // namespace

TEST_CASE("linear ramp endpoints and frozen alpha_bar") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  CHECK(s.beta(1) == 1e-4);
  CHECK(s.beta(50) == 0.035);
  CHECK(std::abs(s.alpha_bar(50) - kAlphaBar50) <= 1e-12);
  CHECK(std::abs(verify::alpha_bar_oracle(50, 1e-4, 0.035) - kAlphaBar50) <= 1e-15);
}

TEST_CASE("weight clamp") {
  CHECK(interpolation_weight(1.0) == 0.0);
  CHECK(interpolation_weight(0.25) == 1.0);  // raw sqrt(1.5)
  const double ab = 0.9;
  CHECK(interpolation_weight(ab) == doctest::Approx(std::sqrt((1 - ab) / std::sqrt(ab))));
  CHECK_THROWS_AS(interpolation_weight(std::nan("")), NumericError);
}

TEST_CASE("terminal weight and first full weight") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  CHECK(s.w(50) == 1.0);
  // The unclamped formula stays below 1 on this ramp (about 0.958 at T), so
  // only the terminal step is full.
  CHECK(s.w(49) < 1.0);
  CHECK(verify::first_full_weight_oracle(50, 1e-4, 0.035) == 50);
  const NoiseSchedule steep = build_schedule(50, 1e-4, 0.2);
  int first = 0;
  for (int t = 1; t <= 50 && first == 0; ++t) {
    if (steep.w(t) == 1.0) first = t;
  }
  CHECK(first == verify::first_full_weight_oracle(50, 1e-4, 0.2));
  CHECK(first < 50);
}

TEST_CASE("invariants hold across random valid ramps") {
  Rng rng(5, 0, 0);
  for (int k = 0; k < 200; ++k) {
    const int T = rng.uniform_int(2, 200);
    const double lo = std::exp(std::log(1e-5) + rng.uniform() * std::log(1e3));
    const double hi = lo + 0.3 * rng.uniform();
    NoiseSchedule s;
    try {
      s = build_schedule(T, lo, hi);
    } catch (const NumericError&) {
      continue;  // delta < 0 pairings are rejected by design
    }
    for (int t = 1; t <= T; ++t) {
      REQUIRE(s.beta(t) > 0.0);
      REQUIRE(s.beta(t) < 1.0);
      REQUIRE(s.alpha_bar(t) < s.alpha_bar(t - 1));
      REQUIRE(s.w(t) >= s.w(t - 1));
      REQUIRE(s.delta(t) >= 0.0);
      REQUIRE(s.delta(t) == (1.0 - s.alpha_bar(t)) - s.w(t) * s.w(t) * s.alpha_bar(t));
      const double total = s.delta(t) + s.w(t) * s.w(t) * s.alpha_bar(t) +
                           s.alpha_bar(t) * (1.0 - s.w(t)) * (1.0 - s.w(t));
      REQUIRE(total <= 1.0 + 1e-9);
    }
    REQUIRE(s.w(T) == 1.0);
    for (int t = 2; t <= T; ++t) {
      const double bt = (1.0 - s.alpha_bar(t - 1)) / (1.0 - s.alpha_bar(t)) * s.beta(t);
      REQUIRE(s.beta_tilde(t) == doctest::Approx(bt).epsilon(1e-15));
    }
    REQUIRE(s.beta_tilde(1) == s.beta(1));
    REQUIRE(NoiseSchedule::parse(s.dump()) == s);
  }
}

TEST_CASE("degenerate and invalid ramps are rejected") {
  CHECK_THROWS_AS(build_schedule(2, 1e-12, 1e-12), NumericError);
  CHECK_THROWS_AS(build_schedule(1, 1e-4, 0.035), ConfigError);
  CHECK_THROWS_AS(build_schedule(50, 0.0, 0.035), ConfigError);
  CHECK_THROWS_AS(build_schedule(50, 0.04, 0.035), ConfigError);
  CHECK_THROWS_AS(build_schedule(50, 1e-4, 1.0), ConfigError);
  CHECK_THROWS_AS(build_schedule(50, 1e-4, std::numeric_limits<double>::infinity()),
                  ConfigError);
}

TEST_CASE("zero weights collapse to the unconditional process") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035, WeightRule::kZero);
  for (int t = 1; t <= 50; ++t) {
    CHECK(s.w(t) == 0.0);
    const double expected = 1.0 - s.alpha_bar(t);
    CHECK(std::memcmp(&expected, &s.deltas()[t], sizeof expected) == 0);
    const ReverseCoefficients c = bridge_coefficients(s.marginal(t - 1), s.marginal(t), s.beta(t));
    const double sa = std::sqrt(s.alpha(t));
    CHECK(c.c_yt == 0.0);
    CHECK(c.c_xt == doctest::Approx(1.0 / sa).epsilon(1e-14));
    CHECK(c.c_eps == doctest::Approx(s.beta(t) / (sa * std::sqrt(1 - s.alpha_bar(t)))).epsilon(1e-14));
  }
}

TEST_CASE("explicit arrays go through the same validation") {
  std::vector<double> betas{0.0, 0.3, 0.4, 0.5};
  CHECK_NOTHROW(schedule_from_arrays(betas, {0.0, 0.2, 0.5, 1.0}));
  CHECK_THROWS_AS(schedule_from_arrays(betas, {0.0, 0.5, 0.2, 1.0}), NumericError);
  CHECK_THROWS_AS(schedule_from_arrays(betas, {0.0, 0.9, 0.95, 1.0}), NumericError);
  CHECK_THROWS_AS(schedule_from_arrays(betas, {0.0, 0.2, 0.5}), ConfigError);
}

TEST_CASE("reverse variance contracts below the marginal except at T") {
  const NoiseSchedule s = build_schedule(50, 1e-4, 0.035);
  for (int t = 1; t < 50; ++t) CHECK(s.delta_tilde(t) <= s.delta(t));
  // With w_T pinned to 1 the terminal marginal is narrower than the bridge
  // variance into T - 1; see the README.
  CHECK(s.delta_tilde(50) > s.delta(50));
}
