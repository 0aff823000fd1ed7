// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "mose/errors.h"
#include "mose/rng.h"
#include "mose/signals.h"
#include "mose/wav.h"

using namespace mose;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mose_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("mixing at a target SNR") {
  Rng rng(1, 0, 0);
  const Signal clean = rng.normal_vector(4000);
  const Signal noise = rng.normal_vector(4000);
  const SignalPair p0 = mix_at_snr(clean, noise, 0.0);
  Signal scaled(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) scaled[i] = p0.y[i] - clean[i];
  CHECK(mean_power(clean) == doctest::Approx(mean_power(scaled)).epsilon(1e-6));
  for (double snr : {-5.0, 2.5, 17.5}) {
    const SignalPair p = mix_at_snr(clean, noise, snr);
    for (std::size_t i = 0; i < clean.size(); ++i) scaled[i] = p.y[i] - clean[i];
    CHECK(snr_db(clean, scaled) == doctest::Approx(snr).epsilon(1e-9));
    CHECK(p.snr_db == snr);
  }
}

TEST_CASE("mixing is scale-equivariant") {
  Rng rng(2, 0, 0);
  const Signal clean = rng.normal_vector(512);
  const Signal noise = rng.normal_vector(512);
  Signal c3 = clean, n3 = noise;
  for (double& v : c3) v *= 3.0;
  for (double& v : n3) v *= 3.0;
  const SignalPair a = mix_at_snr(clean, noise, 5.0);
  const SignalPair b = mix_at_snr(c3, n3, 5.0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK(b.y[i] == doctest::Approx(3.0 * a.y[i]).epsilon(1e-12));
  }
}

TEST_CASE("mixing rejects bad input") {
  const Signal one(16, 0.5);
  const Signal silent(16, 0.0);
  CHECK_THROWS_AS(mix_at_snr(one, Signal(8, 0.1), 0.0), DataError);
  CHECK_THROWS_AS(mix_at_snr(one, silent, 0.0), DataError);
  CHECK_THROWS_AS(mix_at_snr(Signal{}, Signal{}, 0.0), DataError);
}

TEST_CASE("pair validation") {
  SignalPair p;
  p.x0 = {0.1, 0.2};
  p.y = {0.1};
  CHECK_THROWS_AS(validate(p), DataError);
  p.y = {0.1, std::nan("")};
  CHECK_THROWS_AS(validate(p), DataError);
  p.y = {0.1, 0.2};
  CHECK_NOTHROW(validate(p));
  p.sample_rate = 0;
  CHECK_THROWS_AS(validate(p), DataError);
}

TEST_CASE("WAV round trip stays within one quantization step") {
  const fs::path dir = scratch("wav");
  fs::create_directories(dir);
  Signal sine(1600);
  for (std::size_t i = 0; i < sine.size(); ++i) {
    sine[i] = std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0);
  }
  write_wav(dir / "a.wav", sine, 16000);
  const WavData back = read_wav(dir / "a.wav");
  REQUIRE(back.samples.size() == sine.size());
  CHECK(back.sample_rate == 16000);
  double worst = 0.0;
  for (std::size_t i = 0; i < sine.size(); ++i) {
    worst = std::max(worst, std::abs(back.samples[i] - sine[i]));
  }
  CHECK(worst <= 1.0 / 32768.0);
  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("synthetic corpus is deterministic and labelled") {
  CorpusOptions o;
  o.utterances = 8;
  o.length = 256;
  const auto a = synth_corpus(o);
  const auto b = synth_corpus(o);
  REQUIRE(a.size() == 8);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x0 == b[i].x0);
    CHECK(a[i].y == b[i].y);
    CHECK(a[i].snr_db == o.snr_levels[i % o.snr_levels.size()]);
    Signal noise(a[i].y.size());
    for (std::size_t k = 0; k < noise.size(); ++k) noise[k] = a[i].y[k] - a[i].x0[k];
    CHECK(snr_db(a[i].x0, noise) == doctest::Approx(a[i].snr_db).epsilon(1e-9));
  }
  o.seed = 2;
  CHECK(synth_corpus(o)[0].x0 != a[0].x0);
}

TEST_CASE("corpus directories round trip") {
  const fs::path dir = scratch("corpus");
  CorpusOptions o;
  o.utterances = 4;
  o.length = 128;
  auto pairs = synth_corpus(o);
  o.split = Split::kTest;
  for (const SignalPair& p : synth_corpus(o)) pairs.push_back(p);
  write_corpus(dir, pairs);
  const auto back = read_corpus(dir);
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].id == pairs[i].id);
    CHECK(back[i].split == pairs[i].split);
    CHECK(back[i].snr_db == pairs[i].snr_db);
    for (std::size_t k = 0; k < back[i].y.size(); ++k) {
      REQUIRE(std::abs(back[i].y[k] - pairs[i].y[k]) <= 1.0 / 32768.0);
    }
  }
  CHECK(filter_split(back, Split::kTest).size() == 4);
  fs::remove_all(dir);
}
