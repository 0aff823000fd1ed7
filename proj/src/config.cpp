// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/config.h"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "mose/errors.h"
#include "mose/metric.h"
#include "mose/rng.h"

namespace mose {

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad number for " + key + ": '" + s + "'");
}

long long parse_int(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad integer for " + key + ": '" + s + "'");
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + s + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Field {
  const char* key;
  bool phase1;  // influences iterations < n_th
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&)> set;
};

#define MOSE_INT(name, p1)                                                  \
  Field {                                                                   \
    #name, p1, [](const TrainConfig& c) { return std::to_string(c.name); }, \
        [](TrainConfig& c, const std::string& v) {                          \
          c.name = static_cast<decltype(c.name)>(parse_int(#name, v));      \
        }                                                                   \
  }
#define MOSE_DOUBLE(name, p1)                                                \
  Field {                                                                    \
    #name, p1, [](const TrainConfig& c) { return fmt_double(c.name); },      \
        [](TrainConfig& c, const std::string& v) {                           \
          c.name = parse_double(#name, v);                                   \
        }                                                                    \
  }
#define MOSE_BOOL(name, p1)                                                  \
  Field {                                                                    \
    #name, p1,                                                               \
        [](const TrainConfig& c) { return std::string(c.name ? "true" : "false"); }, \
        [](TrainConfig& c, const std::string& v) {                           \
          c.name = parse_bool(#name, v);                                     \
        }                                                                    \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      MOSE_INT(n_total, false),
      MOSE_INT(n_th, true),
      MOSE_DOUBLE(gamma, false),
      MOSE_DOUBLE(alpha, false),
      MOSE_DOUBLE(lr_d_phase1, true),
      MOSE_DOUBLE(lr_d_phase2, false),
      MOSE_DOUBLE(lr_v, false),
      MOSE_INT(batch, true),
      MOSE_INT(seed, true),
      MOSE_INT(steps, true),
      MOSE_DOUBLE(beta_min, true),
      MOSE_DOUBLE(beta_max, true),
      Field{"metric", false, [](const TrainConfig& c) { return c.metric; },
            [](TrainConfig& c, const std::string& v) { c.metric = v; }},
      Field{"update_order", false,
            [](const TrainConfig& c) {
              return std::string(c.update_order == UpdateOrder::kValueFirst
                                     ? "value_first"
                                     : "diffusion_first");
            },
            [](TrainConfig& c, const std::string& v) {
              if (v == "diffusion_first") {
                c.update_order = UpdateOrder::kDiffusionFirst;
              } else if (v == "value_first") {
                c.update_order = UpdateOrder::kValueFirst;
              } else {
                throw ConfigError("update_order must be diffusion_first or "
                                  "value_first");
              }
            }},
      MOSE_BOOL(elbo_only, false),
      MOSE_BOOL(critic_step_input, false),
      MOSE_INT(d_channels, true),
      MOSE_INT(d_blocks, true),
      MOSE_INT(v_hidden, false),
      MOSE_DOUBLE(guard_factor, true),
      MOSE_INT(guard_warmup, true),
  };
  return f;
}

#undef MOSE_INT
#undef MOSE_DOUBLE
#undef MOSE_BOOL

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void TrainConfig::validate() const {
  if (n_total < 0 || n_th < 0 || n_th > n_total) {
    throw ConfigError("need 0 <= n_th <= n_total");
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(lr_d_phase1 > 0.0) || !(lr_d_phase2 > 0.0) || !(lr_v > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (steps < 2) throw ConfigError("steps must be >= 2");
  if (!(guard_factor > 1.0) || guard_warmup < 1) {
    throw ConfigError("guard_factor must exceed 1 and guard_warmup be >= 1");
  }
  make_metric(metric);
}

NoiseSchedule TrainConfig::schedule() const {
  return build_schedule(steps, beta_min, beta_max);
}

DiffusionNet TrainConfig::diffusion_net() const {
  DiffusionNetConfig c;
  c.channels = d_channels;
  c.blocks = d_blocks;
  return DiffusionNet(c);
}

ValueNet TrainConfig::value_net() const {
  ValueNetConfig c;
  c.hidden = v_hidden;
  c.step_input = critic_step_input;
  return ValueNet(c);
}

std::string TrainConfig::serialize() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + "=" + f.get(*this) + "\n";
  return out;
}

std::uint64_t TrainConfig::hash() const {
  const std::string s = serialize();
  return fnv1a(s.data(), s.size());
}

std::uint64_t TrainConfig::phase1_hash() const {
  std::string s;
  for (const Field& f : fields()) {
    if (f.phase1) s += std::string(f.key) + "=" + f.get(*this) + "\n";
  }
  return fnv1a(s.data(), s.size());
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + key + "'");
}

TrainConfig TrainConfig::parse(const std::string& text) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_at = line.find('#');
    if (hash_at != std::string::npos) line.resize(hash_at);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key=value");
    }
    c.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace mose
