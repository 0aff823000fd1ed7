// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/nn/adam.h"

#include <cmath>

#include "mose/errors.h"

namespace mose::nn {

Adam::Adam(std::size_t size, AdamOptions options)
    : options_(options), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(ParamSet& params, double learning_rate) {
  if (params.size() != m_.size()) {
    throw ConfigError("optimizer state does not match parameter count");
  }
  std::span<double> grads = params.grads();
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("non-finite gradient at parameter " +
                         std::to_string(i) + "; step aborted");
    }
  }
  ++steps_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  std::span<double> values = params.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grads[i];
    const double m = static_cast<float>(b1 * m_[i] + (1.0 - b1) * g);
    const double v = static_cast<float>(b2 * v_[i] + (1.0 - b2) * g * g);
    m_[i] = m;
    v_[i] = v;
    const double update = learning_rate * (m / correction1) /
                          (std::sqrt(v / correction2) + options_.epsilon);
    values[i] = static_cast<float>(values[i] - update);
  }
  params.zero_grad();
}

void Adam::restore(std::int64_t steps, std::vector<double> m,
                   std::vector<double> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) {
    throw DataError("optimizer state size mismatch");
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace mose::nn
