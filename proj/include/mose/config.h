// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Training configuration as a flat key=value text file.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mose/nets.h"
#include "mose/schedule.h"

namespace mose {

enum class UpdateOrder { kDiffusionFirst, kValueFirst };

struct TrainConfig {
  int n_total = 4000;
  int n_th = 3000;
  double gamma = 0.95;
  double alpha = 1.0;
  double lr_d_phase1 = 2e-3;
  double lr_d_phase2 = 1e-3;
  // Stable with alpha up to 5; at 1e-4 the critic runs away once alpha >= 1.
  double lr_v = 3e-5;
  int batch = 8;
  std::uint64_t seed = 0;
  int steps = 50;  // T
  double beta_min = 1e-4;
  double beta_max = 0.035;
  std::string metric = "si_snr";
  UpdateOrder update_order = UpdateOrder::kDiffusionFirst;
  // Joint phase trains D on L1 only and never touches V.
  bool elbo_only = false;
  bool critic_step_input = false;
  int d_channels = 16;
  int d_blocks = 4;
  int v_hidden = 32;
  double guard_factor = 10.0;
  int guard_warmup = 20;

  // Throws ConfigError when an invariant is violated.
  void validate() const;

  NoiseSchedule schedule() const;
  DiffusionNet diffusion_net() const;
  ValueNet value_net() const;

  // key=value lines in a fixed order; doubles with 17 significant digits.
  std::string serialize() const;
  // Hash of serialize(); resuming requires it to match.
  std::uint64_t hash() const;
  // Hash of the keys that influence iterations before n_th, so a warm-up
  // checkpoint can seed runs that differ only in joint-phase settings.
  std::uint64_t phase1_hash() const;

  // Applies one key=value assignment; throws ConfigError on an unknown key
  // or malformed value.
  void set(const std::string& key, const std::string& value);

  static TrainConfig parse(const std::string& text);
  static TrainConfig load(const std::string& path);
};

std::vector<std::string> config_keys();
std::string hex64(std::uint64_t v);

}  // namespace mose
