// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation reports, the loss/metric mismatch experiment and the alpha
// sweep built on top of the trainer.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mose/config.h"
#include "mose/diffusion.h"
#include "mose/metric.h"
#include "mose/nets.h"
#include "mose/schedule.h"
#include "mose/signals.h"

namespace mose {

// How enhanced signals are produced from y.
struct SamplerSpec {
  // Empty: full T-step reverse process. Otherwise the inference betas.
  std::vector<double> fast_betas;
  NoiseMode mode = NoiseMode::kDeterministic;
  std::uint64_t seed = 0;  // utterance i uses Rng(seed, i, ...) when stochastic
};

// Enhances every pair's y (parallel over utterances, ordered output).
std::vector<Signal> enhance_all(const DiffusionNet& net, const ParamSet& theta_d,
                                const NoiseSchedule& schedule,
                                const std::vector<SignalPair>& pairs,
                                const SamplerSpec& sampler);

// Candidate signals for one report system; nullopt alpha prints as "-".
struct EvalSystem {
  std::string name;
  std::optional<double> alpha;
  std::vector<Signal> outputs;  // one per pair
};

struct ReportRow {
  std::string system;
  std::optional<double> alpha;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  int n = 0;
};

inline constexpr const char* kReportHeader = "system,alpha,metric,mean,std,n";

// Scores every system against the pairs' x0. The unprocessed y row is
// emitted first when `include_unprocessed` is set.
std::vector<ReportRow> evaluate(const std::vector<SignalPair>& pairs,
                                const std::vector<EvalSystem>& systems,
                                const std::vector<MetricSpec>& metrics,
                                bool include_unprocessed = true);

void write_report(std::ostream& out, const std::vector<ReportRow>& rows);

// Per-utterance scatter point of the mismatch experiment.
struct MismatchPoint {
  std::string id;
  double sum_l1 = 0.0;        // L1-only model: sum over all reverse steps
  double delta_elbo = 0.0;    // L1-only model: m(x0_hat) - m(y)
  double reward_sum = 0.0;    // metric-trained model: cumulative reward R
  double delta_metric = 0.0;  // metric-trained model: m(x0_hat) - m(y)
  double telescoped = 0.0;    // reward metric m_r(x0_hat) - m_r(x_T)
};

struct MismatchReport {
  std::vector<MismatchPoint> points;
  double corr_l1 = 0.0;      // corr(sum L1, delta_elbo)
  double corr_reward = 0.0;  // corr(R, delta_metric)
};

// Deterministic (z = 0) full rollouts of both models over `pairs`. Rewards
// use `reward_metric`; deltas use `report_metric`. Throws DataError for
// fewer than 3 pairs.
MismatchReport mismatch_experiment(const DiffusionNet& net,
                                   const ParamSet& theta_elbo,
                                   const ParamSet& theta_metric,
                                   const NoiseSchedule& schedule,
                                   const std::vector<SignalPair>& pairs,
                                   const MetricSpec& reward_metric,
                                   const MetricSpec& report_metric);

void write_mismatch(std::ostream& out, const MismatchReport& report);

// Pearson correlation; throws DataError for fewer than 3 points or zero
// variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct SweepOptions {
  std::vector<double> alphas{0.0, 0.1, 1.0, 5.0};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<std::string> metrics{"si_snr", "seg_snr", "neg_mse"};
  SamplerSpec sampler;
  // Where per-run checkpoints go; empty keeps everything in memory.
  std::filesystem::path work_dir;
  std::function<void(const std::string&)> log;
};

struct SweepResult {
  // Table rows pooled over seeds and utterances.
  std::vector<ReportRow> rows;
  // mean test score of the first metric, indexed [alpha][seed].
  std::vector<std::vector<double>> per_seed;
};

// For each seed runs the warm-up once, branches one joint phase per alpha,
// and evaluates the test pairs. An alpha of exactly 0 runs the joint phase
// with elbo_only set, which yields the same diffusion parameters without
// training the unused critic. A run stopped by the divergence guard scores
// NaN and contributes no utterances to its rows.
SweepResult alpha_sweep(const TrainConfig& base,
                        const std::vector<SignalPair>& train,
                        const std::vector<SignalPair>& test,
                        const SweepOptions& options);

}  // namespace mose
