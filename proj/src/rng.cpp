// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/rng.h"

namespace mose {

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t counter,
                            std::uint64_t stream) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed),    hi(seed),   lo(counter),
                       hi(counter), lo(stream), hi(stream)};
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t counter, std::uint64_t stream) {
  auto seq = make_seed_seq(seed, counter, stream);
  engine_.seed(seq);
}

int Rng::uniform_int(int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  return dist(engine_);
}

void Rng::fill_normal(std::span<double> out) {
  for (double& v : out) v = normal_(engine_);
}

std::vector<double> Rng::normal_vector(std::size_t n) {
  std::vector<double> out(n);
  fill_normal(out);
  return out;
}

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t basis) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = basis;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace mose
