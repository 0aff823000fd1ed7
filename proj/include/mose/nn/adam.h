// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mose/nn/params.h"

namespace mose::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction. Moments live at float32 precision, like the
// parameters, so optimizer state survives a checkpoint bit for bit.
class Adam {
 public:
  Adam() = default;
  explicit Adam(std::size_t size, AdamOptions options = {});

  // Applies one update from params.grads() and zeroes the gradients. If any
  // gradient is non-finite nothing is modified and NumericError is thrown.
  void step(ParamSet& params, double learning_rate);

  std::int64_t steps() const { return steps_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }
  const AdamOptions& options() const { return options_; }

  // Restores saved state; sizes must match.
  void restore(std::int64_t steps, std::vector<double> m, std::vector<double> v);

 private:
  AdamOptions options_;
  std::int64_t steps_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace mose::nn
