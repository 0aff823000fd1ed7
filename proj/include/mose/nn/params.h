// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mose {
class Rng;
}

namespace mose::nn {

using Matrix = Eigen::MatrixXd;

struct ParamShape {
  std::string name;
  int rows = 0;
  int cols = 1;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
  friend bool operator==(const ParamShape&, const ParamShape&) = default;
};

// Flat parameter vector with a named shape manifest and a gradient
// accumulator of the same layout. Entries are column-major matrices.
// Values are held in double but kept representable in float32, which is the
// on-disk precision.
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::vector<ParamShape> manifest);

  const std::vector<ParamShape>& manifest() const { return manifest_; }
  std::size_t size() const { return values_.size(); }
  std::size_t entry_count() const { return manifest_.size(); }
  std::size_t offset(std::size_t entry) const { return offsets_.at(entry); }
  std::size_t find(const std::string& name) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }

  std::span<double> entry_values(std::size_t entry);
  std::span<const double> entry_values(std::size_t entry) const;
  Eigen::Map<const Matrix> matrix(std::size_t entry) const;

  void zero_grad();
  // Rounds every value to the nearest float32.
  void round_to_float();
  // FNV-1a of the float32 image of the values.
  std::uint64_t hash() const;

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.manifest_ == b.manifest_ && a.values_ == b.values_;
  }

 private:
  std::vector<ParamShape> manifest_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

std::string describe_manifest(const std::vector<ParamShape>& manifest);
std::vector<ParamShape> parse_manifest(const std::string& text);

// Fan-in scaled uniform init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
void fill_uniform(std::span<double> values, int fan_in, Rng& rng);

}  // namespace mose::nn
