// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reward, actor loss, critic target and Bellman loss for the joint phase.

#pragma once

#include <span>
#include <vector>

#include "mose/metric.h"
#include "mose/nets.h"
#include "mose/signals.h"

namespace mose {

struct Transition {
  LatentState from;  // x_t
  Signal action;     // eps_t
  LatentState to;    // x_{t-1}
  double reward = 0.0;
  int t = 0;
};

// r_t = m(x_{t-1}, x0) - m(x_t, x0).
double reward(const LatentState& x_prev, const LatentState& x_cur,
              std::span<const double> x0, const MetricSpec& metric);

// Throws DataError unless the transition is well formed (adjacent steps,
// equal lengths, finite reward).
void validate(const Transition& transition);

struct ActorTerm {
  double loss = 0.0;               // L2 = -V(x_t, eps_hat, x0)
  std::vector<double> eps_grad;    // dL2/d(eps_hat)
};

// Evaluates L2 with the value network frozen; no gradient reaches theta_v.
// The caller folds alpha * eps_grad into the diffusion network's output
// gradient.
ActorTerm actor_loss(const ValueNet& value_net, const ParamSet& theta_v,
                     std::span<const double> x_t,
                     std::span<const double> eps_hat,
                     std::span<const double> x0, double step);

// V_t = r_t + gamma V(x_{t-1}, D(x_{t-1}, y, t-1), x0), with the bootstrap
// dropped when t - 1 == 0. The result is a constant for the critic update.
double critic_target(double r, double gamma, const ValueNet& value_net,
                     const ParamSet& theta_v, const DiffusionNet& diffusion_net,
                     const ParamSet& theta_d, const LatentState& x_prev,
                     std::span<const double> y, std::span<const double> x0);

// L3 = (target - V(x_t, eps_t, x0))^2. When `grads` is non-empty,
// scale * dL3/d(theta_v) is added into it.
double bellman_loss(const ValueNet& value_net, const ParamSet& theta_v,
                    std::span<const double> x_t, std::span<const double> eps,
                    std::span<const double> x0, double step, double target,
                    std::span<double> grads = {}, double scale = 1.0);

}  // namespace mose
