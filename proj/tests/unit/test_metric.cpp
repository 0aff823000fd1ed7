// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "mose/errors.h"
#include "mose/metric.h"
#include "mose/rng.h"
#include "mose/signals.h"

using namespace mose;

TEST_CASE("si_snr examples") {
  Rng rng(1, 0, 0);
  const Signal ref = rng.normal_vector(1000);
  Signal twice = ref;
  for (double& v : twice) v *= 2.0;
  CHECK(si_snr(ref, ref) == kSiSnrCeiling);
  CHECK(si_snr(twice, ref) == si_snr(ref, ref));
  const Signal noise = rng.normal_vector(1000);
  Signal mix = ref;
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] += noise[i];
  Signal scaled = mix;
  for (double& v : scaled) v *= -0.3;
  // A negative gain flips the projection but not the score.
  CHECK(si_snr(scaled, ref) == doctest::Approx(si_snr(mix, ref)).epsilon(1e-12));
  CHECK(si_snr(Signal(1000, 0.0), ref) == kSiSnrFloor);
  CHECK_THROWS_AS(si_snr(ref, Signal(1000, 0.0)), DataError);
  CHECK_THROWS_AS(si_snr(ref, Signal(999, 1.0)), DataError);
}

TEST_CASE("si_snr against a hand-computed orthogonal case") {
  // Zero-mean reference r and an orthogonal zero-mean disturbance n with
  // |n|^2 = |r|^2 / 4: 10 log10(4) dB.
  const Signal r{1, -1, 1, -1};
  const Signal n{0.5, 0.5, -0.5, -0.5};
  Signal c(4);
  for (int i = 0; i < 4; ++i) c[i] = r[i] + n[i];
  CHECK(si_snr(c, r) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
}

TEST_CASE("seg_snr frames and clamps") {
  Rng rng(2, 0, 0);
  const Signal ref = rng.normal_vector(512);
  CHECK(seg_snr(ref, ref, 128) == kSegSnrCeiling);
  Signal c = ref;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] *= 0.5;  // SNR 6.02 dB per frame
  CHECK(seg_snr(c, ref, 128) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  // A full-length frame is a plain clamped SNR.
  CHECK(seg_snr(c, ref, 512) == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-12));
  // Trailing partial frame is ignored.
  Signal tail = c;
  tail.resize(512 + 60, 9.0);
  Signal ref_tail = ref;
  ref_tail.resize(512 + 60, -3.0);
  CHECK(seg_snr(tail, ref_tail, 128) == seg_snr(c, ref, 128));
  CHECK_THROWS_AS(seg_snr(c, ref, 1024), DataError);
}

TEST_CASE("neg_mse") {
  const Signal a{1, 2, 3}, b{1, 0, 3};
  CHECK(neg_mse(a, b) == doctest::Approx(-4.0 / 3.0));
  CHECK(neg_mse(a, a) == 0.0);
}

TEST_CASE("metric registry") {
  for (const std::string& n : builtin_metric_names()) {
    CHECK(make_metric(n).name == n);
  }
  CHECK(make_metric("si_snr").higher_is_better);
  CHECK_NOTHROW(make_metric("seg_snr:64"));
  CHECK_THROWS_AS(make_metric("seg_snr:0"), ConfigError);
  CHECK_THROWS_AS(make_metric("seg_snr:abc"), ConfigError);
  CHECK_THROWS_AS(make_metric("pesq"), ConfigError);
  CHECK_THROWS_AS(make_metric("external:echo 1"), ConfigError);
}

TEST_CASE("external scorer contract") {
  const Signal s{0.1, -0.2, 0.3, 0.0};
  CHECK(make_metric("external:echo 2.5 {ref} {deg} >/dev/null; echo 2.5")(s, s) == 2.5);
  CHECK_THROWS_AS(make_metric("external:echo nan {ref} {deg}")(s, s), DataError);
  CHECK_THROWS_AS(make_metric("external:false {ref} {deg}")(s, s), DataError);
  CHECK_THROWS_AS(make_metric("external:echo 1 2 {ref} {deg}")(s, s), DataError);
}

TEST_CASE("constant offset costs its square under neg_mse") {
  const Signal x{0.3, -0.1, 0.7};
  Signal shifted = x;
  for (double& v : shifted) v += 0.25;
  CHECK(neg_mse(x, shifted) == doctest::Approx(-0.0625).epsilon(1e-12));
}

TEST_CASE("segmental and scale-invariant SNR fall together as noise grows") {
  Rng rng(9, 0, 0);
  const Signal ref = rng.normal_vector(2048);
  const Signal noise = rng.normal_vector(2048);
  double last_si = 1e9, last_seg = 1e9;
  for (double g : {0.1, 0.3, 1.0}) {
    Signal c = ref;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += g * noise[i];
    const double si = si_snr(c, ref), seg = seg_snr(c, ref, 128);
    CHECK(si < last_si);
    CHECK(seg < last_seg);
    last_si = si;
    last_seg = seg;
  }
}

TEST_CASE("every built-in metric peaks at the reference") {
  Rng rng(10, 0, 0);
  const Signal ref = rng.normal_vector(512);
  for (const std::string& name : builtin_metric_names()) {
    const MetricSpec m = make_metric(name);
    const double best = m(ref, ref);
    for (int k = 0; k < 50; ++k) {
      Signal c = ref;
      const Signal d = rng.normal_vector(ref.size());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] += 1e-3 * d[i];
      REQUIRE(m(c, ref) <= best);
    }
  }
}
