// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/diffusion.h"

#include <cmath>

#include "mose/errors.h"

namespace mose {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DataError(std::string(what) + ": length mismatch");
}

void require_step(int t, const NoiseSchedule& schedule) {
  if (t < 1 || t > schedule.steps()) {
    throw DataError("step " + std::to_string(t) + " outside [1, " +
                    std::to_string(schedule.steps()) + "]");
  }
}

}  // namespace

LatentState forward_sample(const SignalPair& pair, int t,
                           std::span<const double> eps,
                           const NoiseSchedule& schedule) {
  require_step(t, schedule);
  require_same_length(pair.x0.size(), pair.y.size(), "forward_sample");
  require_same_length(pair.x0.size(), eps.size(), "forward_sample");
  const MarginalParams m = schedule.marginal(t);
  const double a = m.clean_gain();
  const double b = m.noisy_gain();
  const double s = std::sqrt(m.delta);
  LatentState out{Signal(eps.size()), t};
  for (std::size_t i = 0; i < eps.size(); ++i) {
    out.x[i] = a * pair.x0[i] + b * pair.y[i] + s * eps[i];
  }
  return out;
}

Signal target_noise(const SignalPair& pair, std::span<const double> eps, int t,
                    const NoiseSchedule& schedule) {
  require_step(t, schedule);
  require_same_length(pair.x0.size(), pair.y.size(), "target_noise");
  require_same_length(pair.x0.size(), eps.size(), "target_noise");
  const MarginalParams m = schedule.marginal(t);
  const double root = std::sqrt(1.0 - m.alpha_bar);
  const double residual_gain = m.noisy_gain() / root;
  const double eps_gain = std::sqrt(m.delta) / root;
  Signal c(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    c[i] = residual_gain * (pair.y[i] - pair.x0[i]) + eps_gain * eps[i];
  }
  return c;
}

Signal implied_target(std::span<const double> x_t, std::span<const double> x0,
                      const MarginalParams& marginal) {
  require_same_length(x_t.size(), x0.size(), "implied_target");
  const double a = std::sqrt(marginal.alpha_bar);
  const double root = std::sqrt(1.0 - marginal.alpha_bar);
  Signal c(x_t.size());
  for (std::size_t i = 0; i < x_t.size(); ++i) c[i] = (x_t[i] - a * x0[i]) / root;
  return c;
}

double elbo_loss(std::span<const double> eps_hat,
                 std::span<const double> target, std::span<double> grad) {
  require_same_length(eps_hat.size(), target.size(), "elbo_loss");
  if (eps_hat.empty()) throw DataError("elbo_loss: empty input");
  const double inv_len = 1.0 / static_cast<double>(eps_hat.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < eps_hat.size(); ++i) {
    acc += std::abs(eps_hat[i] - target[i]);
  }
  if (!grad.empty()) {
    require_same_length(grad.size(), eps_hat.size(), "elbo_loss gradient");
    for (std::size_t i = 0; i < eps_hat.size(); ++i) {
      const double d = eps_hat[i] - target[i];
      grad[i] = d > 0.0 ? inv_len : (d < 0.0 ? -inv_len : 0.0);
    }
  }
  return acc * inv_len;
}

ReverseCoefficients reverse_coefficients(int t, const NoiseSchedule& schedule) {
  require_step(t, schedule);
  return bridge_coefficients(schedule.marginal(t - 1), schedule.marginal(t),
                             schedule.beta(t));
}

Signal apply_reverse(const ReverseCoefficients& c, std::span<const double> x,
                     std::span<const double> y,
                     std::span<const double> eps_hat,
                     std::span<const double> z) {
  require_same_length(x.size(), y.size(), "reverse step");
  require_same_length(x.size(), eps_hat.size(), "reverse step");
  Signal out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = c.c_xt * x[i] + c.c_yt * y[i] - c.c_eps * eps_hat[i];
  }
  if (!z.empty()) {
    require_same_length(x.size(), z.size(), "reverse step noise");
    const double sigma = std::sqrt(c.variance);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] += sigma * z[i];
  }
  return out;
}

LatentState reverse_step(const LatentState& x_t, std::span<const double> y,
                         std::span<const double> eps_hat,
                         std::span<const double> z,
                         const NoiseSchedule& schedule) {
  const ReverseCoefficients c = reverse_coefficients(x_t.t, schedule);
  const std::span<const double> noise =
      x_t.t == 1 ? std::span<const double>{} : z;
  return {apply_reverse(c, x_t.x, y, eps_hat, noise), x_t.t - 1};
}

std::vector<double> default_fast_schedule() {
  return {1e-4, 1e-3, 1e-2, 5e-2, 2e-1, 3.5e-1};
}

InferenceSchedule align_inference_schedule(std::span<const double> betas,
                                           const NoiseSchedule& schedule) {
  const int big_t = schedule.steps();
  if (betas.empty() || static_cast<int>(betas.size()) > big_t) {
    throw ConfigError("inference schedule needs 1..T steps");
  }
  constexpr double kSlack = 1e-12;
  const double ab_first = schedule.alpha_bar(1);
  const double ab_last = schedule.alpha_bar(big_t);

  InferenceSchedule chain;
  chain.steps.push_back(AlignedStep{});  // clean endpoint: abar = 1, w = 0
  double alpha_bar = 1.0;
  int t = 1;  // search cursor; alpha_bar only decreases
  for (double beta : betas) {
    if (!(beta > 0.0 && beta < 1.0)) {
      throw ConfigError("inference variance outside (0, 1)");
    }
    alpha_bar *= 1.0 - beta;
    if (alpha_bar > ab_first * (1.0 + kSlack) ||
        alpha_bar < ab_last * (1.0 - kSlack)) {
      throw ConfigError("inference variance " + std::to_string(beta) +
                        " cannot be aligned to the training schedule");
    }
    AlignedStep s;
    s.beta = beta;
    while (t < big_t && schedule.alpha_bar(t + 1) >= alpha_bar) ++t;
    double w;
    if (alpha_bar == schedule.alpha_bar(t) || t == big_t) {
      s.step = t;
      w = schedule.w(t);
    } else {
      const double hi = std::sqrt(schedule.alpha_bar(t));
      const double lo = std::sqrt(schedule.alpha_bar(t + 1));
      const double frac = (hi - std::sqrt(alpha_bar)) / (hi - lo);
      s.step = t + frac;
      w = schedule.w(t) + frac * (schedule.w(t + 1) - schedule.w(t));
    }
    s.marginal = {alpha_bar, w, (1.0 - alpha_bar) - w * w * alpha_bar};
    if (!(s.marginal.delta > 0.0)) {
      throw ConfigError("aligned inference step has non-positive variance");
    }
    s.coefficients =
        bridge_coefficients(chain.steps.back().marginal, s.marginal, beta);
    chain.steps.push_back(s);
  }
  return chain;
}

namespace {

// Shared reverse loop. `step_of(k)` gives the network step input, `coeffs(k)`
// the coefficients, for chain position k = K..1.
template <typename StepFn, typename CoeffFn>
Signal run_reverse(const DiffusionNet& net, const ParamSet& params,
                   std::span<const double> y, int length,
                   const MarginalParams& top, StepFn step_of, CoeffFn coeffs,
                   NoiseMode mode, Rng* rng, const StepObserver& observer) {
  if (mode == NoiseMode::kStochastic && rng == nullptr) {
    throw ConfigError("stochastic sampling needs an Rng");
  }
  const std::size_t n = y.size();
  LatentState x{Signal(n), length};
  const double mean_gain = top.noisy_gain();
  const double sd = std::sqrt(top.delta);
  std::vector<double> z(n, 0.0);
  if (mode == NoiseMode::kStochastic) rng->fill_normal(z);
  for (std::size_t i = 0; i < n; ++i) x.x[i] = mean_gain * y[i] + sd * z[i];

  for (int k = length; k >= 1; --k) {
    const std::vector<double> eps_hat = net.forward(params, x.x, y, step_of(k));
    std::span<const double> noise;
    if (k > 1 && mode == NoiseMode::kStochastic) {
      rng->fill_normal(z);
      noise = z;
    }
    LatentState next{apply_reverse(coeffs(k), x.x, y, eps_hat, noise), k - 1};
    if (observer) observer(x, next, eps_hat);
    x = std::move(next);
  }
  return std::move(x.x);
}

}  // namespace

Signal reverse_sample(const DiffusionNet& net, const ParamSet& params,
                      std::span<const double> y, const NoiseSchedule& schedule,
                      NoiseMode mode, Rng* rng, const StepObserver& observer) {
  const int big_t = schedule.steps();
  // w_T = 1, so x_T is centred on sqrt(abar_T) y.
  return run_reverse(
      net, params, y, big_t, schedule.marginal(big_t),
      [](int k) { return static_cast<double>(k); },
      [&](int k) { return reverse_coefficients(k, schedule); }, mode, rng,
      observer);
}

Signal fast_sample(const DiffusionNet& net, const ParamSet& params,
                   std::span<const double> y, const InferenceSchedule& chain,
                   NoiseMode mode, Rng* rng, const StepObserver& observer) {
  const int length = chain.length();
  if (length < 1) throw ConfigError("empty inference chain");
  return run_reverse(
      net, params, y, length, chain.steps[length].marginal,
      [&](int k) { return chain.steps[k].step; },
      [&](int k) { return chain.steps[k].coefficients; }, mode, rng, observer);
}

}  // namespace mose
