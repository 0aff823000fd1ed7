// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-phase training loop: L1 warm-up of the diffusion network, then joint
// actor-critic updates with the value network. Checkpoints are directories
// holding a text manifest and little-endian float32 arrays.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mose/config.h"
#include "mose/metric.h"
#include "mose/nets.h"
#include "mose/nn/adam.h"
#include "mose/schedule.h"
#include "mose/signals.h"

namespace mose {

struct TelemetryRow {
  int iter = 0;
  int phase = 1;
  double l1 = 0.0;
  double l2 = 0.0;
  double l3 = 0.0;
  double reward_mean = 0.0;
  double target_mean = 0.0;

  friend bool operator==(const TelemetryRow&, const TelemetryRow&) = default;
};

inline constexpr const char* kTelemetryHeader =
    "iter,phase,L1,L2,L3,reward_mean,target_mean";

std::string format_telemetry(const TelemetryRow& row);
void write_telemetry(std::ostream& out, const std::vector<TelemetryRow>& rows);
std::vector<TelemetryRow> read_telemetry(std::istream& in);

// Running state of the divergence guard on the batch-mean L1.
struct GuardState {
  double warmup_sum = 0.0;
  int warmup_count = 0;
  double ema = 0.0;

  friend bool operator==(const GuardState&, const GuardState&) = default;
};

std::uint64_t corpus_hash(const std::vector<SignalPair>& corpus);

class Trainer {
 public:
  // Fresh run at iteration 0. The corpus must be non-empty and every pair
  // at least as long as the value network's minimum input.
  Trainer(TrainConfig config, std::vector<SignalPair> corpus);

  // Continues a checkpointed run. `config` must hash identically to the
  // checkpoint's (ConfigError otherwise) and the corpus must match.
  static Trainer resume(const std::filesystem::path& checkpoint,
                        const TrainConfig& config,
                        std::vector<SignalPair> corpus);

  // Starts `config` from a checkpoint taken exactly at iteration n_th of a
  // run whose warm-up settings match (phase1_hash). The value network and
  // its optimizer start fresh, as they would at n_th of an uninterrupted
  // run.
  static Trainer branch(const std::filesystem::path& checkpoint,
                        const TrainConfig& config,
                        std::vector<SignalPair> corpus);

  // One iteration; returns its telemetry row.
  const TelemetryRow& step();
  // Runs iterations until `iter` (exclusive) or n_total, whichever is first.
  void run_until(int iter);
  void run() { run_until(config_.n_total); }

  void save(const std::filesystem::path& dir) const;

  int iteration() const { return iter_; }
  bool done() const { return iter_ >= config_.n_total; }
  const TrainConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const DiffusionNet& diffusion_net() const { return dnet_; }
  const ValueNet& value_net() const { return vnet_; }
  const ParamSet& theta_d() const { return theta_d_; }
  const ParamSet& theta_v() const { return theta_v_; }
  const std::vector<TelemetryRow>& telemetry() const { return telemetry_; }
  const GuardState& guard() const { return guard_; }

  // Called after every iteration (used for logging and hash assertions).
  std::function<void(const Trainer&)> on_iteration;

 private:
  void phase1_batch(TelemetryRow& row);
  void joint_batch(TelemetryRow& row);
  void update_guard(double l1);

  TrainConfig config_;
  std::vector<SignalPair> corpus_;
  NoiseSchedule schedule_;
  DiffusionNet dnet_;
  ValueNet vnet_;
  MetricSpec metric_;
  ParamSet theta_d_;
  ParamSet theta_v_;
  nn::Adam adam_d_;
  nn::Adam adam_v_;
  GuardState guard_;
  int iter_ = 0;
  std::vector<TelemetryRow> telemetry_;
};

// Loaded checkpoint contents.
struct Checkpoint {
  TrainConfig config;
  int iter = 0;
  std::uint64_t corpus_hash = 0;
  ParamSet theta_d;
  ParamSet theta_v;
  std::int64_t adam_d_steps = 0;
  std::int64_t adam_v_steps = 0;
  std::vector<double> adam_d_m, adam_d_v, adam_v_m, adam_v_v;
  GuardState guard;
  std::vector<TelemetryRow> telemetry;
};

// Throws DataError on a missing, corrupted or inconsistent checkpoint.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

// Diffusion-network parameters of a checkpoint, for enhancement.
ParamSet load_diffusion_params(const std::filesystem::path& dir,
                               TrainConfig* config = nullptr);

}  // namespace mose
