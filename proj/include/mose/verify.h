// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Oracle and property checks shared by the acceptance runner and the
// `selfcheck` command. Each check returns a verdict with a one-line detail;
// tolerances are fixed here.

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "mose/config.h"
#include "mose/experiments.h"

namespace mose::verify {

struct Verdict {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

// Independent oracles.

// alpha_bar_T by multiplying (1 - beta_t) in 50-digit decimal arithmetic.
double alpha_bar_oracle(int steps, double beta_min, double beta_max);
// Smallest t at which the (unclamped) weight formula reaches 1, evaluated
// stepwise in 50-digit arithmetic; returns `steps` when it never does, since
// the terminal weight is pinned to 1.
int first_full_weight_oracle(int steps, double beta_min, double beta_max);

// Relative error used by the finite-difference checks:
// |a - b| / max(|a|, |b|, floor).
double relative_error(double a, double b, double floor);

struct GradientReport {
  int checked = 0;
  double worst = 0.0;
};

// Central differences on `coords` random coordinates of theta_d for
// L1(D(x_t, y, t), C_t).
GradientReport check_l1_gradient(int coords, std::uint64_t seed);
// Central differences of -V(x_t, D(x_t, y, t), x0) on theta_d coordinates,
// through the value network's eps input.
GradientReport check_actor_gradient(int coords, std::uint64_t seed);
// Central differences of (target - V)^2 on theta_v coordinates.
GradientReport check_bellman_gradient(int coords, std::uint64_t seed);
// Central differences of V on eps coordinates.
GradientReport check_value_eps_gradient(int coords, std::uint64_t seed);

inline constexpr double kGradientTolerance = 1e-4;

// Acceptance criteria. Each runs self-contained; 8 needs the sweep
// checkpoints written by 7 under `work_dir`.
Verdict criterion_schedule();             // 1
Verdict criterion_reduction();            // 2
Verdict criterion_marginal_consistency(); // 3
Verdict criterion_gradients();            // 4
Verdict criterion_telescoping();          // 5
Verdict criterion_phase_discipline();     // 6
Verdict criterion_alpha_trend(const std::filesystem::path& work_dir,
                              const std::function<void(const std::string&)>& log);  // 7
Verdict criterion_mismatch(const std::filesystem::path& work_dir);  // 8
Verdict criterion_determinism();          // 9

// Desk configuration and corpora used by criteria 7 and 8.
TrainConfig trend_config();
std::vector<SignalPair> trend_train_corpus();
std::vector<SignalPair> trend_test_corpus();
SweepOptions trend_sweep_options();

// Times `fn` and fills seconds/budget; a check that exceeds its budget
// fails.
Verdict timed(int id, const std::string& name, double budget_seconds,
              const std::function<Verdict()>& fn);

}  // namespace mose::verify
