// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/experiments.h"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "mose/errors.h"
#include "mose/parallel.h"
#include "mose/rl.h"
#include "mose/rng.h"
#include "mose/trainer.h"

namespace mose {

namespace {

constexpr std::uint64_t kEnhanceStream = 0x656e68;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void mean_std(std::span<const double> v, double& mean, double& sd) {
  if (v.empty()) {
    mean = sd = std::nan("");
    return;
  }
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  sd = std::sqrt(var / static_cast<double>(v.size()));
}

}  // namespace

std::vector<Signal> enhance_all(const DiffusionNet& net, const ParamSet& theta_d,
                                const NoiseSchedule& schedule,
                                const std::vector<SignalPair>& pairs,
                                const SamplerSpec& sampler) {
  std::optional<InferenceSchedule> chain;
  if (!sampler.fast_betas.empty()) {
    chain = align_inference_schedule(sampler.fast_betas, schedule);
  }
  std::vector<Signal> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    Rng rng(sampler.seed, i, kEnhanceStream);
    Rng* r = sampler.mode == NoiseMode::kStochastic ? &rng : nullptr;
    out[i] = chain ? fast_sample(net, theta_d, pairs[i].y, *chain, sampler.mode, r)
                   : reverse_sample(net, theta_d, pairs[i].y, schedule,
                                    sampler.mode, r);
  });
  return out;
}

std::vector<ReportRow> evaluate(const std::vector<SignalPair>& pairs,
                                const std::vector<EvalSystem>& systems,
                                const std::vector<MetricSpec>& metrics,
                                bool include_unprocessed) {
  if (pairs.empty()) throw DataError("evaluate: no utterances");
  std::vector<const EvalSystem*> order;
  EvalSystem unprocessed{"unprocessed", std::nullopt, {}};
  if (include_unprocessed) {
    for (const SignalPair& p : pairs) unprocessed.outputs.push_back(p.y);
    order.push_back(&unprocessed);
  }
  for (const EvalSystem& s : systems) {
    if (s.outputs.size() != pairs.size()) {
      throw DataError("system " + s.name + " has " +
                      std::to_string(s.outputs.size()) + " outputs for " +
                      std::to_string(pairs.size()) + " utterances");
    }
    order.push_back(&s);
  }
  std::vector<ReportRow> rows;
  for (const EvalSystem* s : order) {
    for (const MetricSpec& m : metrics) {
      std::vector<double> scores(pairs.size());
      parallel_for(pairs.size(), [&](std::size_t i) {
        scores[i] = m(s->outputs[i], pairs[i].x0);
      });
      ReportRow row{s->name, s->alpha, m.name, 0.0, 0.0,
                    static_cast<int>(scores.size())};
      mean_std(scores, row.mean, row.std);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_report(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kReportHeader << "\n";
  for (const ReportRow& r : rows) {
    out << r.system << "," << (r.alpha ? fmt(*r.alpha) : "-") << "," << r.metric
        << "," << fmt(r.mean) << "," << fmt(r.std) << "," << r.n << "\n";
  }
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 3) {
    throw DataError("correlation needs at least 3 paired points");
  }
  double ma, sa, mb, sb;
  mean_std(a, ma, sa);
  mean_std(b, mb, sb);
  if (!(sa > 0.0) || !(sb > 0.0)) throw DataError("correlation of a constant");
  double cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) cov += (a[i] - ma) * (b[i] - mb);
  cov /= static_cast<double>(a.size());
  return cov / (sa * sb);
}

MismatchReport mismatch_experiment(const DiffusionNet& net,
                                   const ParamSet& theta_elbo,
                                   const ParamSet& theta_metric,
                                   const NoiseSchedule& schedule,
                                   const std::vector<SignalPair>& pairs,
                                   const MetricSpec& reward_metric,
                                   const MetricSpec& report_metric) {
  if (pairs.size() < 3) {
    throw DataError("mismatch experiment needs at least 3 utterances");
  }
  MismatchReport report;
  report.points.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const SignalPair& p = pairs[i];
    MismatchPoint& pt = report.points[i];
    pt.id = p.id;
    const double base = report_metric(p.y, p.x0);

    const Signal elbo_out = reverse_sample(
        net, theta_elbo, p.y, schedule, NoiseMode::kDeterministic, nullptr,
        [&](const LatentState& from, const LatentState&,
            std::span<const double> eps_hat) {
          const Signal c = implied_target(from.x, p.x0, schedule.marginal(from.t));
          pt.sum_l1 += elbo_loss(eps_hat, c);
        });
    pt.delta_elbo = report_metric(elbo_out, p.x0) - base;

    double first = 0.0;
    bool have_first = false;
    const Signal metric_out = reverse_sample(
        net, theta_metric, p.y, schedule, NoiseMode::kDeterministic, nullptr,
        [&](const LatentState& from, const LatentState& to,
            std::span<const double>) {
          if (!have_first) {
            first = reward_metric(from.x, p.x0);
            have_first = true;
          }
          pt.reward_sum += reward(to, from, p.x0, reward_metric);
        });
    pt.delta_metric = report_metric(metric_out, p.x0) - base;
    pt.telescoped = reward_metric(metric_out, p.x0) - first;
  });
  std::vector<double> l1, de, r, dm;
  for (const MismatchPoint& pt : report.points) {
    l1.push_back(pt.sum_l1);
    de.push_back(pt.delta_elbo);
    r.push_back(pt.reward_sum);
    dm.push_back(pt.delta_metric);
  }
  report.corr_l1 = pearson(l1, de);
  report.corr_reward = pearson(r, dm);
  return report;
}

void write_mismatch(std::ostream& out, const MismatchReport& report) {
  out << "id,sum_L1,delta_m_elbo,R,delta_m_metric\n";
  for (const MismatchPoint& p : report.points) {
    out << p.id << "," << fmt(p.sum_l1) << "," << fmt(p.delta_elbo) << ","
        << fmt(p.reward_sum) << "," << fmt(p.delta_metric) << "\n";
  }
  out << "# corr(sum_L1,delta_m)=" << fmt(report.corr_l1)
      << " corr(R,delta_m)=" << fmt(report.corr_reward) << "\n";
}

SweepResult alpha_sweep(const TrainConfig& base,
                        const std::vector<SignalPair>& train,
                        const std::vector<SignalPair>& test,
                        const SweepOptions& options) {
  if (options.alphas.empty() || options.seeds.empty() || options.metrics.empty()) {
    throw ConfigError("sweep needs alphas, seeds and metrics");
  }
  auto log = [&](const std::string& s) {
    if (options.log) options.log(s);
  };
  std::vector<MetricSpec> metrics;
  for (const std::string& m : options.metrics) metrics.push_back(make_metric(m));

  const std::size_t na = options.alphas.size();
  // scores[alpha][metric] pooled over seeds and utterances.
  std::vector<std::vector<std::vector<double>>> pooled(
      na, std::vector<std::vector<double>>(metrics.size()));
  SweepResult result;
  result.per_seed.assign(na, {});

  for (std::uint64_t seed : options.seeds) {
    TrainConfig warm = base;
    warm.seed = seed;
    Trainer warmup(warm, train);
    warmup.run_until(warm.n_th);
    const std::filesystem::path dir =
        options.work_dir.empty()
            ? std::filesystem::temp_directory_path() /
                  ("mose_sweep_" + hex64(warm.phase1_hash()))
            : options.work_dir / ("seed" + std::to_string(seed));
    const std::filesystem::path warm_dir = dir / "warmup";
    warmup.save(warm_dir);
    log("seed " + std::to_string(seed) + ": warm-up done");

    for (std::size_t a = 0; a < na; ++a) {
      TrainConfig cfg = warm;
      cfg.alpha = options.alphas[a];
      if (cfg.alpha == 0.0) cfg.elbo_only = true;
      Trainer tr = Trainer::branch(warm_dir, cfg, train);
      try {
        tr.run();
      } catch (const NumericError& e) {
        // A diverged run stays in the table as NaN instead of ending the sweep.
        log("seed " + std::to_string(seed) + " alpha " + fmt(cfg.alpha) + ": " + e.what());
        result.per_seed[a].push_back(std::nan(""));
        continue;
      }
      if (!options.work_dir.empty()) {
        tr.save(dir / ("alpha_" + fmt(cfg.alpha)));
      }
      const std::vector<Signal> out = enhance_all(
          tr.diffusion_net(), tr.theta_d(), tr.schedule(), test, options.sampler);
      double first_mean = 0.0;
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        double sum = 0.0;
        for (std::size_t i = 0; i < test.size(); ++i) {
          const double s = metrics[m](out[i], test[i].x0);
          pooled[a][m].push_back(s);
          sum += s;
        }
        if (m == 0) first_mean = sum / static_cast<double>(test.size());
      }
      result.per_seed[a].push_back(first_mean);
      log("seed " + std::to_string(seed) + " alpha " + fmt(cfg.alpha) + ": " +
          metrics[0].name + " " + fmt(first_mean));
    }
    if (options.work_dir.empty()) std::filesystem::remove_all(dir);
  }

  result.rows = evaluate(test, {}, metrics, true);
  for (std::size_t a = 0; a < na; ++a) {
    const std::string name = options.alphas[a] == 0.0 ? "elbo" : "mose";
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      ReportRow row{name, options.alphas[a], metrics[m].name, 0.0, 0.0,
                    static_cast<int>(pooled[a][m].size())};
      mean_std(pooled[a][m], row.mean, row.std);
      result.rows.push_back(row);
    }
  }
  return result;
}

}  // namespace mose
