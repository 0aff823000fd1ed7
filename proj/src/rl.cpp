// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/rl.h"

#include <cmath>

#include "mose/errors.h"

namespace mose {

double reward(const LatentState& x_prev, const LatentState& x_cur,
              std::span<const double> x0, const MetricSpec& metric) {
  if (x_prev.x.size() != x_cur.x.size() || x_cur.x.size() != x0.size()) {
    throw DataError("reward: states and reference differ in length");
  }
  return metric(x_prev.x, x0) - metric(x_cur.x, x0);
}

void validate(const Transition& tr) {
  if (tr.from.t != tr.t || tr.to.t != tr.t - 1 || tr.t < 1) {
    throw DataError("transition steps must go from t to t - 1");
  }
  if (tr.from.x.size() != tr.to.x.size() ||
      tr.action.size() != tr.from.x.size()) {
    throw DataError("transition vectors differ in length");
  }
  if (!std::isfinite(tr.reward)) throw DataError("non-finite reward");
}

ActorTerm actor_loss(const ValueNet& value_net, const ParamSet& theta_v,
                     std::span<const double> x_t,
                     std::span<const double> eps_hat,
                     std::span<const double> x0, double step) {
  ValueNet::Pass pass = value_net.run(theta_v, x_t, eps_hat, x0, step);
  ActorTerm term;
  term.loss = -pass.value();
  pass.backward(-1.0, {});
  term.eps_grad = pass.eps_grad();
  return term;
}

double critic_target(double r, double gamma, const ValueNet& value_net,
                     const ParamSet& theta_v, const DiffusionNet& diffusion_net,
                     const ParamSet& theta_d, const LatentState& x_prev,
                     std::span<const double> y, std::span<const double> x0) {
  if (x_prev.t == 0 || gamma == 0.0) return r;
  const double step = x_prev.t;
  const std::vector<double> next_action =
      diffusion_net.forward(theta_d, x_prev.x, y, step);
  return r + gamma * value_net.forward(theta_v, x_prev.x, next_action, x0, step);
}

double bellman_loss(const ValueNet& value_net, const ParamSet& theta_v,
                    std::span<const double> x_t, std::span<const double> eps,
                    std::span<const double> x0, double step, double target,
                    std::span<double> grads, double scale) {
  ValueNet::Pass pass = value_net.run(theta_v, x_t, eps, x0, step);
  const double diff = target - pass.value();
  if (!grads.empty()) pass.backward(-2.0 * diff * scale, grads);
  return diff * diff;
}

}  // namespace mose
