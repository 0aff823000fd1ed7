// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/schedule.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "mose/errors.h"

namespace mose {

double MarginalParams::clean_gain() const {
  return (1.0 - w) * std::sqrt(alpha_bar);
}

double MarginalParams::noisy_gain() const { return w * std::sqrt(alpha_bar); }

ReverseCoefficients bridge_coefficients(const MarginalParams& prev,
                                        const MarginalParams& cur,
                                        double beta) {
  if (!(cur.delta > 0.0)) {
    throw NumericError("reverse step undefined: delta_t = " +
                       std::to_string(cur.delta));
  }
  const double sqrt_alpha = std::sqrt(1.0 - beta);
  const double one_minus_ab = 1.0 - cur.alpha_bar;
  ReverseCoefficients c;
  if (prev.w == 0.0 && cur.w == 0.0) {
    c.c_xt = 1.0 / sqrt_alpha;
    c.c_yt = 0.0;
    c.c_eps = beta / (sqrt_alpha * std::sqrt(one_minus_ab));
    c.variance = (1.0 - prev.alpha_bar) / one_minus_ab * beta;
    return c;
  }

  // Transition gain on x_prev. When the previous mean carries no clean
  // component any more the marginals do not pin it; sqrt(alpha) is the
  // choice that keeps the transition a plain rescale-plus-noise step.
  const double k = prev.w < 1.0
                       ? sqrt_alpha * (1.0 - cur.w) / (1.0 - prev.w)
                       : sqrt_alpha;
  double transition_var = cur.delta - k * k * prev.delta;
  if (transition_var < -1e-12 * cur.delta) {
    throw NumericError("schedule admits no consistent one-step transition");
  }
  transition_var = std::max(transition_var, 0.0);

  const double gain = k * prev.delta / cur.delta;
  const double a = prev.clean_gain() - gain * cur.clean_gain();
  const double b = prev.noisy_gain() - gain * cur.noisy_gain();
  const double sqrt_ab = std::sqrt(cur.alpha_bar);
  c.c_xt = gain + a / sqrt_ab;
  c.c_yt = b;
  c.c_eps = a * std::sqrt(one_minus_ab) / sqrt_ab;
  c.variance = prev.delta * transition_var / cur.delta;
  return c;
}

double interpolation_weight(double alpha_bar) {
  if (!std::isfinite(alpha_bar) || alpha_bar <= 0.0 || alpha_bar > 1.0) {
    throw NumericError("interpolation weight needs alpha_bar in (0, 1]");
  }
  const double raw = std::sqrt((1.0 - alpha_bar) / std::sqrt(alpha_bar));
  return std::min(1.0, raw);
}

MarginalParams NoiseSchedule::marginal(int t) const {
  return {alpha_bar_.at(t), w_.at(t), delta_.at(t)};
}

void NoiseSchedule::validate() const {
  for (int t = 1; t <= steps_; ++t) {
    if (!(beta_[t] > 0.0 && beta_[t] < 1.0)) {
      throw ConfigError("beta_" + std::to_string(t) + " outside (0, 1)");
    }
    if (!(alpha_bar_[t] < alpha_bar_[t - 1])) {
      throw NumericError("alpha_bar not strictly decreasing at t=" +
                         std::to_string(t));
    }
    if (!(w_[t] >= 0.0 && w_[t] <= 1.0) || w_[t] < w_[t - 1]) {
      throw NumericError("interpolation weight not monotone in [0,1] at t=" +
                         std::to_string(t));
    }
    if (!(delta_[t] > 0.0)) {
      throw NumericError("delta_" + std::to_string(t) +
                         " <= 0: beta schedule and interpolation weight are "
                         "incompatible");
    }
  }
}

void NoiseSchedule::derive_posteriors() {
  delta_tilde_.assign(steps_ + 1, 0.0);
  beta_tilde_.assign(steps_ + 1, 0.0);
  for (int t = 1; t <= steps_; ++t) {
    delta_tilde_[t] =
        bridge_coefficients(marginal(t - 1), marginal(t), beta_[t]).variance;
    beta_tilde_[t] = t == 1 ? beta_[1]
                            : (1.0 - alpha_bar_[t - 1]) /
                                  (1.0 - alpha_bar_[t]) * beta_[t];
  }
}

NoiseSchedule schedule_from_arrays(std::vector<double> betas,
                                   std::vector<double> weights) {
  if (betas.size() < 3 || betas.size() != weights.size()) {
    throw ConfigError("schedule needs at least 2 steps and matching arrays");
  }
  NoiseSchedule s;
  s.steps_ = static_cast<int>(betas.size()) - 1;
  s.beta_ = std::move(betas);
  s.w_ = std::move(weights);
  s.beta_[0] = 0.0;
  s.w_[0] = 0.0;
  s.alpha_.assign(s.steps_ + 1, 1.0);
  s.alpha_bar_.assign(s.steps_ + 1, 1.0);
  s.delta_.assign(s.steps_ + 1, 0.0);
  for (int t = 1; t <= s.steps_; ++t) {
    if (!std::isfinite(s.beta_[t]) || !std::isfinite(s.w_[t])) {
      throw ConfigError("non-finite schedule entry at t=" + std::to_string(t));
    }
    s.alpha_[t] = 1.0 - s.beta_[t];
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * s.alpha_[t];
    s.delta_[t] =
        (1.0 - s.alpha_bar_[t]) - s.w_[t] * s.w_[t] * s.alpha_bar_[t];
  }
  s.validate();
  s.derive_posteriors();
  return s;
}

NoiseSchedule build_schedule(int steps, double beta_min, double beta_max,
                             WeightRule rule) {
  if (steps < 2) throw ConfigError("schedule needs T >= 2");
  if (!std::isfinite(beta_min) || !std::isfinite(beta_max) ||
      !(beta_min > 0.0) || !(beta_min <= beta_max) || !(beta_max < 1.0)) {
    throw ConfigError("schedule needs 0 < beta_min <= beta_max < 1");
  }
  std::vector<double> betas(steps + 1, 0.0);
  std::vector<double> weights(steps + 1, 0.0);
  double alpha_bar = 1.0;
  for (int t = 1; t <= steps; ++t) {
    const double f = static_cast<double>(t - 1) / (steps - 1);
    betas[t] = beta_min * (1.0 - f) + beta_max * f;
    alpha_bar *= 1.0 - betas[t];
    if (rule == WeightRule::kInterpolated) {
      weights[t] = t == steps ? 1.0 : interpolation_weight(alpha_bar);
    }
  }
  return schedule_from_arrays(std::move(betas), std::move(weights));
}

void NoiseSchedule::dump(std::ostream& out) const {
  out << "t beta alpha_bar w delta delta_tilde\n";
  char line[256];
  for (int t = 1; t <= steps_; ++t) {
    std::snprintf(line, sizeof(line), "%d %.17g %.17g %.17g %.17g %.17g\n", t,
                  beta_[t], alpha_bar_[t], w_[t], delta_[t], delta_tilde_[t]);
    out << line;
  }
}

std::string NoiseSchedule::dump() const {
  std::ostringstream out;
  dump(out);
  return out.str();
}

NoiseSchedule NoiseSchedule::parse(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) ||
      header.rfind("t beta alpha_bar w delta delta_tilde", 0) != 0) {
    throw DataError("schedule table: missing header");
  }
  std::vector<double> betas{0.0}, weights{0.0}, alpha_bars{1.0}, deltas{0.0};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int t = 0;
    double beta, ab, w, delta, delta_tilde;
    if (!(row >> t >> beta >> ab >> w >> delta >> delta_tilde) ||
        t != static_cast<int>(betas.size())) {
      throw DataError("schedule table: malformed row '" + line + "'");
    }
    betas.push_back(beta);
    weights.push_back(w);
    alpha_bars.push_back(ab);
    deltas.push_back(delta);
  }
  NoiseSchedule s = schedule_from_arrays(std::move(betas), std::move(weights));
  if (s.alpha_bar_ != alpha_bars || s.delta_ != deltas) {
    throw DataError("schedule table: stored columns disagree with betas");
  }
  return s;
}

NoiseSchedule NoiseSchedule::parse(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

}  // namespace mose
