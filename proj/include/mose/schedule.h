// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Per-step constants of the conditional diffusion chain.
//
// The forward marginal at step t is
//   x_t ~ N((1 - w_t) sqrt(abar_t) x0 + w_t sqrt(abar_t) y, delta_t I),
//   delta_t = (1 - abar_t) - w_t^2 abar_t,
// and step 0 is the clean signal itself (abar_0 = 1, w_0 = 0, delta_0 = 0).
// Arrays are indexed by step, so index 0 holds the step-0 values.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mose {

// Parameters of one forward marginal q(x_t | x0, y).
struct MarginalParams {
  double alpha_bar = 1.0;
  double w = 0.0;
  double delta = 0.0;

  double clean_gain() const;  // (1 - w) sqrt(abar)
  double noisy_gain() const;  // w sqrt(abar)
};

// Mean of the reverse step expressed in the (x_t, y, eps_hat) basis:
//   mu = c_xt x_t + c_yt y - c_eps eps_hat, with noise variance `variance`.
struct ReverseCoefficients {
  double c_xt = 0.0;
  double c_yt = 0.0;
  double c_eps = 0.0;
  double variance = 0.0;
};

// Gaussian-conjugate reverse step between two adjacent marginals, where
// cur.alpha_bar == prev.alpha_bar * (1 - beta). The one-step transition
// x_cur = k x_prev + h y + N(0, s) is the one whose pushforward of the
// `prev` marginal is the `cur` marginal; the
// posterior mean of x_prev given (x_cur, x0, y) is then rewritten with
// x0 = (x_cur - sqrt(1 - abar_cur) C) / sqrt(abar_cur), C being the combined
// noise target. When both weights are zero the closed-form unconditional
// coefficients are returned directly. Throws NumericError if cur.delta <= 0
// or the implied transition variance is negative.
ReverseCoefficients bridge_coefficients(const MarginalParams& prev,
                                        const MarginalParams& cur,
                                        double beta);

// min(1, sqrt((1 - abar) / sqrt(abar))). Throws on non-finite or
// out-of-range abar.
double interpolation_weight(double alpha_bar);

enum class WeightRule {
  kInterpolated,  // clamped interpolation weight, terminal weight 1
  kZero,          // unconditional chain: w_t = 0 everywhere
};

class NoiseSchedule {
 public:
  int steps() const { return steps_; }

  double beta(int t) const { return beta_.at(t); }
  double alpha(int t) const { return alpha_.at(t); }
  double alpha_bar(int t) const { return alpha_bar_.at(t); }
  double w(int t) const { return w_.at(t); }
  double delta(int t) const { return delta_.at(t); }
  double delta_tilde(int t) const { return delta_tilde_.at(t); }
  double beta_tilde(int t) const { return beta_tilde_.at(t); }

  MarginalParams marginal(int t) const;

  const std::vector<double>& betas() const { return beta_; }
  const std::vector<double>& alpha_bars() const { return alpha_bar_; }
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& deltas() const { return delta_; }

  // Plain-text table: a header line then one row per t >= 1 with columns
  // t beta alpha_bar w delta delta_tilde, doubles printed with 17 digits.
  void dump(std::ostream& out) const;
  std::string dump() const;
  static NoiseSchedule parse(std::istream& in);
  static NoiseSchedule parse(const std::string& text);

  friend bool operator==(const NoiseSchedule&, const NoiseSchedule&) = default;

 private:
  friend NoiseSchedule build_schedule(int, double, double, WeightRule);
  friend NoiseSchedule schedule_from_arrays(std::vector<double>,
                                            std::vector<double>);

  void validate() const;
  void derive_posteriors();

  int steps_ = 0;
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> w_;
  std::vector<double> delta_;
  std::vector<double> delta_tilde_;
  std::vector<double> beta_tilde_;
};

// Linear beta ramp from beta_min (t = 1) to beta_max (t = T). Throws
// ConfigError on invalid arguments and NumericError when an invariant
// (delta_t > 0, abar strictly decreasing, monotone w) does not hold.
NoiseSchedule build_schedule(int steps, double beta_min, double beta_max,
                             WeightRule rule = WeightRule::kInterpolated);

// Schedule from explicit betas and weights (both indexed 1..T, element 0
// ignored). Same validation as build_schedule.
NoiseSchedule schedule_from_arrays(std::vector<double> betas,
                                   std::vector<double> weights);

}  // namespace mose
