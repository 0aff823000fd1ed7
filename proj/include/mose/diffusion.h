// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Forward sampling, noise targets and reverse steps of the conditional
// diffusion chain, plus full and fast reverse samplers.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mose/nets.h"
#include "mose/rng.h"
#include "mose/schedule.h"
#include "mose/signals.h"

namespace mose {

// x_t = (1 - w_t) sqrt(abar_t) x0 + w_t sqrt(abar_t) y + sqrt(delta_t) eps.
LatentState forward_sample(const SignalPair& pair, int t,
                           std::span<const double> eps,
                           const NoiseSchedule& schedule);

// Combined noise target
//   C_t = w_t sqrt(abar_t) / sqrt(1 - abar_t) (y - x0)
//       + sqrt(delta_t) / sqrt(1 - abar_t) eps.
Signal target_noise(const SignalPair& pair, std::span<const double> eps, int t,
                    const NoiseSchedule& schedule);

// C_t implied by a latent: (x_t - sqrt(abar_t) x0) / sqrt(1 - abar_t). Equal
// to target_noise() when x_t came from forward_sample() with the same eps.
Signal implied_target(std::span<const double> x_t, std::span<const double> x0,
                      const MarginalParams& marginal);

// Mean absolute error between eps_hat and the target. When `grad` is
// non-empty it receives d(loss)/d(eps_hat) = sign(eps_hat - target) / L.
double elbo_loss(std::span<const double> eps_hat,
                 std::span<const double> target, std::span<double> grad = {});

ReverseCoefficients reverse_coefficients(int t, const NoiseSchedule& schedule);

// x_prev = c_xt x + c_yt y - c_eps eps_hat + sqrt(variance) z.
Signal apply_reverse(const ReverseCoefficients& c, std::span<const double> x,
                     std::span<const double> y,
                     std::span<const double> eps_hat,
                     std::span<const double> z);

// One reverse step from x_t.t to x_t.t - 1. The noise z is ignored at t = 1
// (the last step returns the posterior mean) and may be empty there.
LatentState reverse_step(const LatentState& x_t, std::span<const double> y,
                         std::span<const double> eps_hat,
                         std::span<const double> z,
                         const NoiseSchedule& schedule);

// Step of an inference chain aligned onto the training schedule.
struct AlignedStep {
  double step = 0.0;  // fractional training step fed to the network
  double beta = 0.0;
  MarginalParams marginal;
  ReverseCoefficients coefficients;
};

// Inference chain of S <= T steps; steps[0] is the clean endpoint.
struct InferenceSchedule {
  std::vector<AlignedStep> steps;

  int length() const { return static_cast<int>(steps.size()) - 1; }
};

// Maps each inference abar'_s = prod (1 - beta'_k) onto a fractional
// training step tau_s by interpolating sqrt(abar) between neighbouring
// training steps, takes w at tau_s by linear interpolation, and derives the
// reverse coefficients between consecutive inference marginals. Throws
// ConfigError if S > T or some abar'_s is outside [abar_T, abar_1].
InferenceSchedule align_inference_schedule(std::span<const double> betas,
                                           const NoiseSchedule& schedule);

// Default six-step inference variances.
std::vector<double> default_fast_schedule();

enum class NoiseMode {
  kStochastic,     // initial noise and per-step z drawn from the Rng
  kDeterministic,  // z = 0 throughout, x_T = sqrt(abar_T) y
};

// Called after each reverse step with the step index t just left, the
// state it produced (at t - 1), and the network output used.
using StepObserver = std::function<void(const LatentState& from,
                                        const LatentState& to,
                                        std::span<const double> eps_hat)>;

// Full T-step reverse process from x_T ~ N(sqrt(abar_T) y, delta_T I).
// `rng` may be null for kDeterministic.
Signal reverse_sample(const DiffusionNet& net, const ParamSet& params,
                      std::span<const double> y, const NoiseSchedule& schedule,
                      NoiseMode mode, Rng* rng = nullptr,
                      const StepObserver& observer = {});

// Reverse process over an aligned inference chain. Draws random numbers in
// the same order as reverse_sample(), so an inference chain equal to the
// training betas reproduces it exactly.
Signal fast_sample(const DiffusionNet& net, const ParamSet& params,
                   std::span<const double> y, const InferenceSchedule& chain,
                   NoiseMode mode, Rng* rng = nullptr,
                   const StepObserver& observer = {});

}  // namespace mose
