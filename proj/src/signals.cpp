// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/signals.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "mose/errors.h"
#include "mose/rng.h"
#include "mose/wav.h"

namespace mose {

namespace {

constexpr std::uint64_t kSpeechStream = 11;
constexpr std::uint64_t kNoiseStream = 12;

std::uint64_t split_salt(Split split) {
  return split == Split::kTrain ? 0x7472616eULL : 0x74657374ULL;
}

double peak(std::span<const double> s) {
  double p = 0.0;
  for (double v : s) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace

const char* split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "test") return Split::kTest;
  throw DataError("unknown split '" + name + "'");
}

void validate(const SignalPair& pair) {
  if (pair.x0.empty() || pair.x0.size() != pair.y.size()) {
    throw DataError("signal pair '" + pair.id + "': lengths " +
                    std::to_string(pair.x0.size()) + " vs " +
                    std::to_string(pair.y.size()));
  }
  if (pair.sample_rate <= 0) throw DataError("sample rate must be positive");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(pair.x0.begin(), pair.x0.end(), finite) ||
      !std::all_of(pair.y.begin(), pair.y.end(), finite)) {
    throw DataError("signal pair '" + pair.id + "' has non-finite samples");
  }
}

double mean_power(std::span<const double> signal) {
  double acc = 0.0;
  for (double v : signal) acc += v * v;
  return signal.empty() ? 0.0 : acc / static_cast<double>(signal.size());
}

double snr_db(std::span<const double> clean, std::span<const double> noise) {
  return 10.0 * std::log10(mean_power(clean) / mean_power(noise));
}

SignalPair mix_at_snr(std::span<const double> clean,
                      std::span<const double> noise, double snr, int sample_rate,
                      std::string id) {
  if (clean.size() != noise.size() || clean.empty()) {
    throw DataError("mix_at_snr: clean and noise lengths differ");
  }
  const double p_clean = mean_power(clean);
  if (!(p_clean > 0.0)) throw DataError("mix_at_snr: clean has zero power");
  SignalPair pair;
  pair.x0.assign(clean.begin(), clean.end());
  pair.sample_rate = sample_rate;
  pair.id = std::move(id);
  pair.snr_db = snr;
  if (snr == kNoNoise) {
    pair.y = pair.x0;
    return pair;
  }
  if (std::isnan(snr)) throw DataError("mix_at_snr: NaN SNR");
  const double p_noise = mean_power(noise);
  if (!(p_noise > 0.0)) {
    throw DataError("mix_at_snr: zero-power noise at finite SNR");
  }
  const double gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr / 10.0)));
  pair.y.resize(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    pair.y[i] = clean[i] + gain * noise[i];
  }
  return pair;
}

Signal synth_speech(std::uint64_t seed, std::uint64_t index, int length,
                    int sample_rate) {
  Rng rng(seed, index, kSpeechStream);
  const double two_pi = 2.0 * std::numbers::pi;
  const double f0 = 100.0 + 200.0 * rng.uniform();
  const int harmonics = rng.uniform_int(3, 8);
  std::vector<double> amp(harmonics), phase(harmonics);
  for (int k = 0; k < harmonics; ++k) {
    amp[k] = (0.3 + 0.7 * rng.uniform()) / (k + 1);
    phase[k] = two_pi * rng.uniform();
  }
  const double env_cycles = 0.5 + 1.5 * rng.uniform();
  const double env_phase = two_pi * rng.uniform();

  Signal s(length);
  for (int n = 0; n < length; ++n) {
    const double time = static_cast<double>(n) / sample_rate;
    double v = 0.0;
    for (int k = 0; k < harmonics; ++k) {
      v += amp[k] * std::sin(two_pi * f0 * (k + 1) * time + phase[k]);
    }
    const double env =
        0.25 + 0.75 * (0.5 + 0.5 * std::sin(two_pi * env_cycles * n / length +
                                             env_phase));
    s[n] = env * v;
  }
  const double p = peak(s);
  for (double& v : s) v *= 0.5 / p;
  return s;
}

Signal synth_noise(std::uint64_t seed, std::uint64_t index, int length) {
  Rng rng(seed, index, kNoiseStream);
  const double pole = -0.9 + 1.8 * rng.uniform();
  Signal n(length);
  double state = 0.0;
  for (double& v : n) {
    state = rng.normal() + pole * state;
    v = state;
  }
  return n;
}

std::vector<SignalPair> synth_corpus(const CorpusOptions& options) {
  if (options.utterances <= 0) throw ConfigError("corpus needs utterances > 0");
  if (options.length <= 0) throw ConfigError("corpus needs length > 0");
  if (options.snr_levels.empty()) throw ConfigError("corpus needs SNR levels");
  const std::uint64_t seed = options.seed ^ split_salt(options.split);
  std::vector<SignalPair> pairs;
  pairs.reserve(options.utterances);
  for (int i = 0; i < options.utterances; ++i) {
    const Signal clean =
        synth_speech(seed, i, options.length, options.sample_rate);
    const Signal noise = synth_noise(seed, i, options.length);
    const double snr = options.snr_levels[i % options.snr_levels.size()];
    char id[64];
    std::snprintf(id, sizeof(id), "%s_%04d", split_name(options.split), i);
    SignalPair pair = mix_at_snr(clean, noise, snr, options.sample_rate, id);
    // Common rescale keeps the mixture inside the PCM16 range.
    const double p = peak(pair.y);
    if (p > 0.95) {
      const double g = 0.95 / p;
      for (double& v : pair.x0) v *= g;
      for (double& v : pair.y) v *= g;
    }
    pair.split = options.split;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

void write_corpus(const std::filesystem::path& dir,
                  std::span<const SignalPair> pairs) {
  std::filesystem::create_directories(dir / "clean");
  std::filesystem::create_directories(dir / "noisy");
  std::ofstream index(dir / kCorpusIndex);
  if (!index) throw DataError("cannot write corpus index in " + dir.string());
  index << "id\tpath_clean\tpath_noisy\tsnr_db\tsplit\n";
  for (const SignalPair& pair : pairs) {
    validate(pair);
    const std::string clean = "clean/" + pair.id + ".wav";
    const std::string noisy = "noisy/" + pair.id + ".wav";
    write_wav(dir / clean, pair.x0, pair.sample_rate);
    write_wav(dir / noisy, pair.y, pair.sample_rate);
    char snr[32];
    std::snprintf(snr, sizeof(snr), "%.17g", pair.snr_db);
    index << pair.id << '\t' << clean << '\t' << noisy << '\t' << snr << '\t'
          << split_name(pair.split) << '\n';
  }
}

std::vector<SignalPair> read_corpus(const std::filesystem::path& dir) {
  std::ifstream index(dir / kCorpusIndex);
  if (!index) throw DataError("no corpus index in " + dir.string());
  std::string line;
  if (!std::getline(index, line) ||
      line != "id\tpath_clean\tpath_noisy\tsnr_db\tsplit") {
    throw DataError("corpus index: bad header");
  }
  std::vector<SignalPair> pairs;
  while (std::getline(index, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id, clean, noisy, snr, split;
    if (!std::getline(row, id, '\t') || !std::getline(row, clean, '\t') ||
        !std::getline(row, noisy, '\t') || !std::getline(row, snr, '\t') ||
        !std::getline(row, split)) {
      throw DataError("corpus index: malformed row '" + line + "'");
    }
    WavData c = read_wav(dir / clean);
    WavData n = read_wav(dir / noisy);
    if (c.sample_rate != n.sample_rate) {
      throw DataError("corpus '" + id + "': sample rates differ");
    }
    SignalPair pair;
    pair.x0 = std::move(c.samples);
    pair.y = std::move(n.samples);
    pair.sample_rate = c.sample_rate;
    pair.id = id;
    pair.snr_db = std::strtod(snr.c_str(), nullptr);
    pair.split = parse_split(split);
    validate(pair);
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) throw DataError("corpus index lists no utterances");
  return pairs;
}

std::vector<SignalPair> filter_split(std::span<const SignalPair> pairs,
                                     Split split) {
  std::vector<SignalPair> out;
  for (const SignalPair& p : pairs) {
    if (p.split == split) out.push_back(p);
  }
  return out;
}

}  // namespace mose
