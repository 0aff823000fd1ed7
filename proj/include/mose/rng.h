// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace mose {

// Counter-based stream derivation: every random draw in the library comes
// from an engine keyed by (seed, counter, stream), so a given iteration or
// utterance can be regenerated without replaying earlier ones.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream = 0);

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  // Uniform integer in [lo, hi].
  int uniform_int(int lo, int hi);

  void fill_normal(std::span<double> out);
  std::vector<double> normal_vector(std::size_t n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Stable 64-bit FNV-1a, used for config and content hashes.
std::uint64_t fnv1a(const void* data, std::size_t size,
                    std::uint64_t basis = 0xcbf29ce484222325ULL);

template <typename T>
std::uint64_t hash_values(std::span<const T> values) {
  return fnv1a(values.data(), values.size_bytes());
}

}  // namespace mose
