// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Black-box quality metrics m(candidate, reference), higher is better.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mose {

using MetricFn =
    std::function<double(std::span<const double>, std::span<const double>)>;

struct MetricSpec {
  std::string name;
  MetricFn evaluate;
  bool higher_is_better = true;
  std::optional<std::pair<double, double>> bounded_range;

  double operator()(std::span<const double> candidate,
                    std::span<const double> reference) const {
    return evaluate(candidate, reference);
  }
};

inline constexpr double kSiSnrFloor = -40.0;
inline constexpr double kSiSnrCeiling = 60.0;
inline constexpr double kSegSnrFloor = -10.0;
inline constexpr double kSegSnrCeiling = 35.0;
inline constexpr int kDefaultSegFrame = 128;

// Scale-invariant SNR in dB after removing both means, clipped to
// [kSiSnrFloor, kSiSnrCeiling]. Throws DataError on a constant reference.
double si_snr(std::span<const double> candidate,
              std::span<const double> reference);

// Mean over non-overlapping frames of the per-frame SNR
// 10 log10(sum ref^2 / sum (ref - cand)^2), each clamped to
// [kSegSnrFloor, kSegSnrCeiling]. A trailing partial frame is ignored.
double seg_snr(std::span<const double> candidate,
               std::span<const double> reference,
               int frame = kDefaultSegFrame);

// -mean((candidate - reference)^2).
double neg_mse(std::span<const double> candidate,
               std::span<const double> reference);

// Looks a metric up by name: "si_snr", "seg_snr", "seg_snr:<frame>",
// "neg_mse", or "external:<command template>". The template must contain
// {ref} and {deg}, which are replaced by paths of 16-bit WAV files holding
// the reference and candidate; the command must exit 0 and print a single
// number. Throws ConfigError on unknown names.
MetricSpec make_metric(const std::string& name, int sample_rate = 16000);

std::vector<std::string> builtin_metric_names();

}  // namespace mose
