// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/metric.h"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>

#include "mose/errors.h"
#include "mose/wav.h"

namespace mose {

namespace {

void check_pair(std::span<const double> c, std::span<const double> r,
                const char* what) {
  if (c.size() != r.size() || c.empty()) {
    throw DataError(std::string(what) +
                    ": inputs must have equal nonzero length");
  }
}

double db_ratio(double signal, double noise, double lo, double hi) {
  if (noise <= 0.0) return signal > 0.0 ? hi : lo;
  if (signal <= 0.0) return lo;
  return std::clamp(10.0 * std::log10(signal / noise), lo, hi);
}

std::string replace_all(std::string s, const std::string& key,
                        const std::string& value) {
  for (std::size_t at = s.find(key); at != std::string::npos;
       at = s.find(key, at + value.size())) {
    s.replace(at, key.size(), value);
  }
  return s;
}

std::string shell_quote(const std::string& s) {
  return "'" + replace_all(s, "'", "'\\''") + "'";
}

// Runs an external scorer on one pair.
double run_external(const std::string& command_template, int sample_rate,
                    std::span<const double> candidate,
                    std::span<const double> reference) {
  static std::atomic<unsigned> counter{0};
  namespace fs = std::filesystem;
  const std::string tag = std::to_string(::getpid()) + "_" +
                          std::to_string(counter.fetch_add(1));
  const fs::path dir = fs::temp_directory_path();
  const fs::path ref_path = dir / ("mose_ref_" + tag + ".wav");
  const fs::path deg_path = dir / ("mose_deg_" + tag + ".wav");
  struct Cleanup {
    fs::path a, b;
    ~Cleanup() {
      std::error_code ec;
      fs::remove(a, ec);
      fs::remove(b, ec);
    }
  } cleanup{ref_path, deg_path};

  write_wav(ref_path, reference, sample_rate);
  write_wav(deg_path, candidate, sample_rate);
  const std::string cmd =
      replace_all(replace_all(command_template, "{ref}", shell_quote(ref_path)),
                  "{deg}", shell_quote(deg_path));

  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw DataError("cannot start scorer: " + cmd);
  std::string out;
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
  const int status = ::pclose(pipe);
  if (status != 0) {
    throw DataError("scorer exited with status " + std::to_string(status) +
                    ": " + cmd);
  }
  std::size_t used = 0;
  double score = 0.0;
  try {
    score = std::stod(out, &used);
  } catch (const std::exception&) {
    throw DataError("scorer printed no number: '" + out + "'");
  }
  if (out.find_first_not_of(" \t\r\n", used) != std::string::npos ||
      !std::isfinite(score)) {
    throw DataError("scorer output is not a single finite number: '" + out +
                    "'");
  }
  return score;
}

}  // namespace

double si_snr(std::span<const double> candidate,
              std::span<const double> reference) {
  check_pair(candidate, reference, "si_snr");
  const double n = static_cast<double>(reference.size());
  double mc = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    mc += candidate[i];
    mr += reference[i];
  }
  mc /= n;
  mr /= n;
  double dot = 0.0, rr = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    dot += (candidate[i] - mc) * (reference[i] - mr);
    rr += (reference[i] - mr) * (reference[i] - mr);
  }
  if (!(rr > 0.0)) throw DataError("si_snr: reference has no energy");
  const double gain = dot / rr;
  double target = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double s = gain * (reference[i] - mr);
    const double e = (candidate[i] - mc) - s;
    target += s * s;
    noise += e * e;
  }
  return db_ratio(target, noise, kSiSnrFloor, kSiSnrCeiling);
}

double seg_snr(std::span<const double> candidate,
               std::span<const double> reference, int frame) {
  check_pair(candidate, reference, "seg_snr");
  if (frame <= 0 || static_cast<std::size_t>(frame) > reference.size()) {
    throw DataError("seg_snr: frame of " + std::to_string(frame) +
                    " samples does not fit a signal of " +
                    std::to_string(reference.size()));
  }
  const std::size_t frames = reference.size() / frame;
  double acc = 0.0;
  for (std::size_t f = 0; f < frames; ++f) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = f * frame; i < (f + 1) * frame; ++i) {
      const double d = reference[i] - candidate[i];
      sig += reference[i] * reference[i];
      err += d * d;
    }
    acc += db_ratio(sig, err, kSegSnrFloor, kSegSnrCeiling);
  }
  return acc / static_cast<double>(frames);
}

double neg_mse(std::span<const double> candidate,
               std::span<const double> reference) {
  check_pair(candidate, reference, "neg_mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = candidate[i] - reference[i];
    acc += d * d;
  }
  return -acc / static_cast<double>(reference.size());
}

MetricSpec make_metric(const std::string& name, int sample_rate) {
  if (name == "si_snr") {
    return {name, si_snr, true, std::pair{kSiSnrFloor, kSiSnrCeiling}};
  }
  if (name == "neg_mse") return {name, neg_mse, true, std::nullopt};
  if (name == "seg_snr" || name.rfind("seg_snr:", 0) == 0) {
    int frame = kDefaultSegFrame;
    if (name.size() > 8) {
      try {
        std::size_t used = 0;
        frame = std::stoi(name.substr(8), &used);
        if (used != name.size() - 8) throw ConfigError("");
      } catch (const std::exception&) {
        throw ConfigError("bad seg_snr frame in '" + name + "'");
      }
      if (frame <= 0) throw ConfigError("seg_snr frame must be positive");
    }
    return {name,
            [frame](std::span<const double> c, std::span<const double> r) {
              return seg_snr(c, r, frame);
            },
            true, std::pair{kSegSnrFloor, kSegSnrCeiling}};
  }
  if (name.rfind("external:", 0) == 0) {
    std::string tmpl = name.substr(9);
    if (tmpl.find("{ref}") == std::string::npos ||
        tmpl.find("{deg}") == std::string::npos) {
      throw ConfigError("external scorer template needs {ref} and {deg}");
    }
    return {name,
            [tmpl, sample_rate](std::span<const double> c,
                                std::span<const double> r) {
              return run_external(tmpl, sample_rate, c, r);
            },
            true, std::nullopt};
  }
  throw ConfigError("unknown metric '" + name + "'");
}

std::vector<std::string> builtin_metric_names() {
  return {"si_snr", "seg_snr", "neg_mse"};
}

}  // namespace mose
