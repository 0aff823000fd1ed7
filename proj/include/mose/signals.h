// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace mose {

using Signal = std::vector<double>;

inline constexpr int kDefaultSampleRate = 16000;
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

enum class Split { kTrain, kTest };

const char* split_name(Split split);
Split parse_split(const std::string& name);

// Clean reference x0 and noisy conditioner y of equal length.
struct SignalPair {
  Signal x0;
  Signal y;
  int sample_rate = kDefaultSampleRate;
  std::string id;
  // Corpus metadata: the SNR the pair was mixed at and its split.
  double snr_db = kNoNoise;
  Split split = Split::kTrain;

  std::size_t length() const { return x0.size(); }
};

// Throws DataError unless len(x0) == len(y) > 0, every sample is finite and
// the sample rate is positive.
void validate(const SignalPair& pair);

// Reverse-process state: samples at diffusion step t (t = 0 is fully
// reversed).
struct LatentState {
  Signal x;
  int t = 0;
};

double mean_power(std::span<const double> signal);
double snr_db(std::span<const double> clean, std::span<const double> noise);

// y = clean + g * noise with g chosen so that the full-utterance power ratio
// of clean to scaled noise is snr_db. snr_db == kNoNoise yields y == clean.
SignalPair mix_at_snr(std::span<const double> clean,
                      std::span<const double> noise, double snr_db,
                      int sample_rate = kDefaultSampleRate,
                      std::string id = {});

struct CorpusOptions {
  std::uint64_t seed = 1;
  int utterances = 32;
  int length = 512;
  std::vector<double> snr_levels{0.0, 5.0, 10.0, 15.0};
  Split split = Split::kTrain;
  int sample_rate = kDefaultSampleRate;
};

// Deterministic synthetic corpus. Utterance i is mixed at
// snr_levels[i % size] and depends only on (seed, split, i).
std::vector<SignalPair> synth_corpus(const CorpusOptions& options);

// One synthetic "speech" utterance: 3-8 random-phase harmonics under a slow
// random envelope, peak-normalised to 0.5.
Signal synth_speech(std::uint64_t seed, std::uint64_t index, int length,
                    int sample_rate);
// Tilted noise: white noise through a first-order recursive filter with a
// random pole in [-0.9, 0.9].
Signal synth_noise(std::uint64_t seed, std::uint64_t index, int length);

// Corpus on disk: WAV files plus a tab-separated index with the header
// "id\tpath_clean\tpath_noisy\tsnr_db\tsplit". Paths are relative to the
// corpus directory.
inline constexpr const char* kCorpusIndex = "corpus.tsv";
void write_corpus(const std::filesystem::path& dir,
                  std::span<const SignalPair> pairs);
std::vector<SignalPair> read_corpus(const std::filesystem::path& dir);

std::vector<SignalPair> filter_split(std::span<const SignalPair> pairs,
                                     Split split);

}  // namespace mose
