// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include "mose/trainer.h"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <cstring>
#include <map>
#include <optional>
#include <sstream>

#include "mose/diffusion.h"
#include "mose/errors.h"
#include "mose/rl.h"
#include "mose/rng.h"

namespace mose {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint arrays are written in native byte order");

constexpr const char* kFormatTag = "mose-checkpoint-1";
constexpr std::uint64_t kBatchStream = 0x6261746368;   // utterance, t, eps
constexpr std::uint64_t kReverseStream = 0x7265763a7a;  // joint-phase z
constexpr std::uint64_t kDiffusionInitSalt = 0x44;
constexpr std::uint64_t kValueInitSalt = 0x56;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hexfloat(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_number(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw DataError("bad number '" + s + "'");
  }
  return v;
}

struct Sample {
  const SignalPair* pair;
  int t;
  Signal eps;
};

std::vector<Sample> draw_batch(const TrainConfig& c,
                               const std::vector<SignalPair>& corpus, int iter) {
  Rng rng(c.seed, static_cast<std::uint64_t>(iter), kBatchStream);
  std::vector<Sample> batch;
  batch.reserve(c.batch);
  for (int b = 0; b < c.batch; ++b) {
    const int idx = rng.uniform_int(0, static_cast<int>(corpus.size()) - 1);
    const int t = rng.uniform_int(1, c.steps);
    batch.push_back({&corpus[idx], t, rng.normal_vector(corpus[idx].x0.size())});
  }
  return batch;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  const std::uint64_t words[2] = {seed, salt};
  return fnv1a(words, sizeof words);
}

// --- float32 array files ---

std::vector<char> float_image(std::span<const double> values) {
  std::vector<char> bytes(values.size() * sizeof(float));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float f = static_cast<float>(values[i]);
    if (static_cast<double>(f) != values[i] && std::isfinite(values[i])) {
      throw NumericError("value is not representable as float32");
    }
    std::memcpy(bytes.data() + i * sizeof(float), &f, sizeof f);
  }
  return bytes;
}

std::uint64_t write_floats(const fs::path& path, std::span<const double> values) {
  const std::vector<char> bytes = float_image(values);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + path.string());
  return fnv1a(bytes.data(), bytes.size());
}

std::vector<double> read_floats(const fs::path& path, std::size_t count,
                                std::uint64_t expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing checkpoint file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() != count * sizeof(float)) {
    throw DataError(path.string() + ": expected " + std::to_string(count) +
                    " floats, found " + std::to_string(bytes.size()) + " bytes");
  }
  if (fnv1a(bytes.data(), bytes.size()) != expected_hash) {
    throw DataError(path.string() + ": content hash mismatch");
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + i * sizeof(float), sizeof f);
    values[i] = f;
  }
  return values;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing checkpoint file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed manifest line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

const std::string& need(const std::map<std::string, std::string>& kv,
                        const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw DataError("manifest lacks '" + key + "'");
  return it->second;
}

std::uint64_t parse_hex(const std::string& s) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used, 16);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw DataError("bad hash '" + s + "'");
  return v;
}

std::int64_t parse_count(const std::string& s) {
  std::size_t used = 0;
  std::int64_t v = -1;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || v < 0) {
    throw DataError("bad count '" + s + "'");
  }
  return v;
}

}  // namespace

// --- telemetry ---

std::string format_telemetry(const TelemetryRow& r) {
  return std::to_string(r.iter) + "," + std::to_string(r.phase) + "," +
         fmt(r.l1) + "," + fmt(r.l2) + "," + fmt(r.l3) + "," +
         fmt(r.reward_mean) + "," + fmt(r.target_mean);
}

void write_telemetry(std::ostream& out, const std::vector<TelemetryRow>& rows) {
  out << kTelemetryHeader << "\n";
  for (const TelemetryRow& r : rows) out << format_telemetry(r) << "\n";
}

std::vector<TelemetryRow> read_telemetry(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTelemetryHeader) {
    throw DataError("telemetry: bad header");
  }
  std::vector<TelemetryRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw DataError("telemetry: bad row '" + line + "'");
    TelemetryRow r;
    r.iter = static_cast<int>(parse_count(cells[0]));
    r.phase = static_cast<int>(parse_count(cells[1]));
    r.l1 = parse_number(cells[2]);
    r.l2 = parse_number(cells[3]);
    r.l3 = parse_number(cells[4]);
    r.reward_mean = parse_number(cells[5]);
    r.target_mean = parse_number(cells[6]);
    rows.push_back(r);
  }
  return rows;
}

std::uint64_t corpus_hash(const std::vector<SignalPair>& corpus) {
  std::uint64_t h = fnv1a(nullptr, 0);
  for (const SignalPair& p : corpus) {
    h = fnv1a(p.id.data(), p.id.size(), h);
    h = fnv1a(p.x0.data(), p.x0.size() * sizeof(double), h);
    h = fnv1a(p.y.data(), p.y.size() * sizeof(double), h);
  }
  return h;
}

// --- Trainer ---

Trainer::Trainer(TrainConfig config, std::vector<SignalPair> corpus)
    : config_(std::move(config)),
      corpus_(std::move(corpus)),
      schedule_(config_.schedule()),
      dnet_(config_.diffusion_net()),
      vnet_(config_.value_net()),
      metric_(make_metric(config_.metric)) {
  config_.validate();
  if (corpus_.empty()) throw DataError("training corpus is empty");
  for (const SignalPair& p : corpus_) {
    validate(p);
    if (static_cast<int>(p.x0.size()) < vnet_.min_length()) {
      throw DataError("utterance " + p.id + " is shorter than " +
                      std::to_string(vnet_.min_length()) + " samples");
    }
  }
  theta_d_ = dnet_.init(derive_seed(config_.seed, kDiffusionInitSalt));
  theta_v_ = vnet_.init(derive_seed(config_.seed, kValueInitSalt));
  adam_d_ = nn::Adam(theta_d_.size());
  adam_v_ = nn::Adam(theta_v_.size());
}

void Trainer::update_guard(double l1) {
  if (!std::isfinite(l1)) {
    throw NumericError("L1 became non-finite at iteration " +
                       std::to_string(iter_));
  }
  if (guard_.warmup_count < config_.guard_warmup) {
    guard_.warmup_sum += l1;
    if (++guard_.warmup_count == config_.guard_warmup) {
      guard_.ema = guard_.warmup_sum / guard_.warmup_count;
    }
    return;
  }
  guard_.ema = 0.9 * guard_.ema + 0.1 * l1;
  const double reference = guard_.warmup_sum / guard_.warmup_count;
  if (guard_.ema > config_.guard_factor * reference) {
    throw NumericError("training diverged at iteration " +
                       std::to_string(iter_) + ": L1 moving average " +
                       fmt(guard_.ema) + " exceeds " + fmt(config_.guard_factor) +
                       "x its initial value " + fmt(reference));
  }
}

void Trainer::phase1_batch(TelemetryRow& row) {
  const std::vector<Sample> batch = draw_batch(config_, corpus_, iter_);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::span<double> grads = theta_d_.grads();
  for (const Sample& s : batch) {
    const LatentState x = forward_sample(*s.pair, s.t, s.eps, schedule_);
    const Signal target = target_noise(*s.pair, s.eps, s.t, schedule_);
    DiffusionNet::Pass pass = dnet_.run(theta_d_, x.x, s.pair->y, s.t);
    std::vector<double> g(target.size());
    row.l1 += elbo_loss(pass.output(), target, g) * inv_b;
    for (double& v : g) v *= inv_b;
    pass.backward(g, grads);
  }
}

void Trainer::joint_batch(TelemetryRow& row) {
  const std::vector<Sample> batch = draw_batch(config_, corpus_, iter_);
  const std::size_t n = batch.size();
  const double inv_b = 1.0 / static_cast<double>(n);
  Rng zrng(config_.seed, static_cast<std::uint64_t>(iter_), kReverseStream);

  struct Item {
    LatentState x_t;
    Signal target;
    std::optional<DiffusionNet::Pass> pass;
    Signal action;
    LatentState x_prev;
    double reward = 0.0;
  };
  std::vector<Item> items(n);
  for (std::size_t b = 0; b < n; ++b) {
    const Sample& s = batch[b];
    Item& it = items[b];
    it.x_t = forward_sample(*s.pair, s.t, s.eps, schedule_);
    it.target = target_noise(*s.pair, s.eps, s.t, schedule_);
    it.pass.emplace(dnet_.run(theta_d_, it.x_t.x, s.pair->y, s.t));
    auto out = it.pass->output();
    it.action.assign(out.begin(), out.end());
    if (!config_.elbo_only) {
      const Signal z = zrng.normal_vector(it.action.size());
      it.x_prev = reverse_step(it.x_t, s.pair->y, it.action, z, schedule_);
      it.reward = reward(it.x_prev, it.x_t, s.pair->x0, metric_);
    }
  }

  auto update_d = [&] {
    std::span<double> grads = theta_d_.grads();
    for (std::size_t b = 0; b < n; ++b) {
      Item& it = items[b];
      const SignalPair& pair = *batch[b].pair;
      std::vector<double> g(it.target.size());
      row.l1 += elbo_loss(it.action, it.target, g) * inv_b;
      if (!config_.elbo_only) {
        const ActorTerm actor = actor_loss(vnet_, theta_v_, it.x_t.x, it.action,
                                           pair.x0, it.x_t.t);
        row.l2 += actor.loss * inv_b;
        // alpha = 0 leaves the gradient untouched so the update matches the
        // L1-only path bit for bit.
        if (config_.alpha != 0.0) {
          for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] += config_.alpha * actor.eps_grad[i];
          }
        }
      }
      for (double& v : g) v *= inv_b;
      it.pass->backward(g, grads);
    }
    adam_d_.step(theta_d_, config_.lr_d_phase2);
  };

  auto update_v = [&] {
    std::vector<double> targets(n);
    for (std::size_t b = 0; b < n; ++b) {
      const Item& it = items[b];
      const SignalPair& pair = *batch[b].pair;
      targets[b] = critic_target(it.reward, config_.gamma, vnet_, theta_v_,
                                 dnet_, theta_d_, it.x_prev, pair.y, pair.x0);
    }
    std::span<double> grads = theta_v_.grads();
    for (std::size_t b = 0; b < n; ++b) {
      const Item& it = items[b];
      row.l3 += bellman_loss(vnet_, theta_v_, it.x_t.x, it.action,
                             batch[b].pair->x0, it.x_t.t, targets[b], grads,
                             inv_b) *
                inv_b;
      row.reward_mean += it.reward * inv_b;
      row.target_mean += targets[b] * inv_b;
    }
    adam_v_.step(theta_v_, config_.lr_v);
  };

  // Each update must leave the other network untouched.
  auto isolated = [](const auto& update, const ParamSet& other, const char* what) {
    const std::uint64_t before = other.hash();
    update();
    if (other.hash() != before) throw CheckFailure(std::string(what) + " changed");
  };
  auto step_d = [&] { isolated(update_d, theta_v_, "actor update: theta_v"); };
  auto step_v = [&] { isolated(update_v, theta_d_, "critic update: theta_d"); };
  if (config_.elbo_only) {
    step_d();
  } else if (config_.update_order == UpdateOrder::kDiffusionFirst) {
    step_d();
    step_v();
  } else {
    step_v();
    step_d();
  }
}

const TelemetryRow& Trainer::step() {
  if (done()) throw ConfigError("training already finished");
  TelemetryRow row;
  row.iter = iter_;
  if (iter_ < config_.n_th) {
    row.phase = 1;
    phase1_batch(row);
    update_guard(row.l1);
    adam_d_.step(theta_d_, config_.lr_d_phase1);
  } else {
    row.phase = 2;
    joint_batch(row);
    update_guard(row.l1);
  }
  telemetry_.push_back(row);
  ++iter_;
  if (on_iteration) on_iteration(*this);
  return telemetry_.back();
}

void Trainer::run_until(int iter) {
  while (iter_ < std::min(iter, config_.n_total)) step();
}

// --- checkpoints ---

void Trainer::save(const fs::path& dir) const {
  fs::create_directories(dir);
  std::map<std::string, std::uint64_t> files;
  files["theta_d.f32"] = write_floats(dir / "theta_d.f32", theta_d_.values());
  files["theta_v.f32"] = write_floats(dir / "theta_v.f32", theta_v_.values());
  files["adam_d_m.f32"] = write_floats(dir / "adam_d_m.f32", adam_d_.first_moment());
  files["adam_d_v.f32"] = write_floats(dir / "adam_d_v.f32", adam_d_.second_moment());
  files["adam_v_m.f32"] = write_floats(dir / "adam_v_m.f32", adam_v_.first_moment());
  files["adam_v_v.f32"] = write_floats(dir / "adam_v_v.f32", adam_v_.second_moment());
  {
    std::ofstream out(dir / "config.txt", std::ios::trunc);
    out << config_.serialize();
  }
  {
    std::ofstream out(dir / "telemetry.csv", std::ios::trunc);
    write_telemetry(out, telemetry_);
  }
  const std::string config_text = config_.serialize();
  std::ostringstream tele;
  write_telemetry(tele, telemetry_);
  const std::string tele_text = tele.str();

  std::ofstream out(dir / "manifest.txt", std::ios::trunc);
  out << "format=" << kFormatTag << "\n"
      << "iter=" << iter_ << "\n"
      << "config_hash=" << hex64(config_.hash()) << "\n"
      << "phase1_hash=" << hex64(config_.phase1_hash()) << "\n"
      << "corpus_hash=" << hex64(corpus_hash(corpus_)) << "\n"
      << "theta_d_layout=" << nn::describe_manifest(theta_d_.manifest()) << "\n"
      << "theta_v_layout=" << nn::describe_manifest(theta_v_.manifest()) << "\n"
      << "adam_d_steps=" << adam_d_.steps() << "\n"
      << "adam_v_steps=" << adam_v_.steps() << "\n"
      << "guard_warmup_sum=" << hexfloat(guard_.warmup_sum) << "\n"
      << "guard_warmup_count=" << guard_.warmup_count << "\n"
      << "guard_ema=" << hexfloat(guard_.ema) << "\n"
      << "hash.config.txt=" << hex64(fnv1a(config_text.data(), config_text.size())) << "\n"
      << "hash.telemetry.csv=" << hex64(fnv1a(tele_text.data(), tele_text.size())) << "\n";
  for (const auto& [name, h] : files) out << "hash." << name << "=" << hex64(h) << "\n";
  if (!out) throw DataError("cannot write manifest in " + dir.string());
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const auto kv = parse_kv(read_text(dir / "manifest.txt"));
  if (need(kv, "format") != kFormatTag) {
    throw DataError("unsupported checkpoint format '" + need(kv, "format") + "'");
  }
  Checkpoint ck;
  const std::string config_text = read_text(dir / "config.txt");
  if (fnv1a(config_text.data(), config_text.size()) !=
      parse_hex(need(kv, "hash.config.txt"))) {
    throw DataError("checkpoint config.txt does not match its manifest");
  }
  try {
    ck.config = TrainConfig::parse(config_text);
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config unreadable: ") + e.what());
  }
  if (ck.config.hash() != parse_hex(need(kv, "config_hash"))) {
    throw DataError("checkpoint config hash mismatch");
  }
  ck.iter = static_cast<int>(parse_count(need(kv, "iter")));
  ck.corpus_hash = parse_hex(need(kv, "corpus_hash"));

  ck.theta_d = ParamSet(nn::parse_manifest(need(kv, "theta_d_layout")));
  ck.theta_v = ParamSet(nn::parse_manifest(need(kv, "theta_v_layout")));
  if (ck.theta_d.manifest() != ck.config.diffusion_net().manifest() ||
      ck.theta_v.manifest() != ck.config.value_net().manifest()) {
    throw DataError("checkpoint layout does not match its config");
  }
  auto load_into = [&](const char* name, std::size_t count) {
    return read_floats(dir / name, count, parse_hex(need(kv, std::string("hash.") + name)));
  };
  const std::vector<double> d = load_into("theta_d.f32", ck.theta_d.size());
  const std::vector<double> v = load_into("theta_v.f32", ck.theta_v.size());
  std::copy(d.begin(), d.end(), ck.theta_d.values().begin());
  std::copy(v.begin(), v.end(), ck.theta_v.values().begin());
  ck.adam_d_m = load_into("adam_d_m.f32", ck.theta_d.size());
  ck.adam_d_v = load_into("adam_d_v.f32", ck.theta_d.size());
  ck.adam_v_m = load_into("adam_v_m.f32", ck.theta_v.size());
  ck.adam_v_v = load_into("adam_v_v.f32", ck.theta_v.size());
  ck.adam_d_steps = parse_count(need(kv, "adam_d_steps"));
  ck.adam_v_steps = parse_count(need(kv, "adam_v_steps"));
  ck.guard.warmup_sum = parse_number(need(kv, "guard_warmup_sum"));
  ck.guard.warmup_count = static_cast<int>(parse_count(need(kv, "guard_warmup_count")));
  ck.guard.ema = parse_number(need(kv, "guard_ema"));

  const std::string tele_text = read_text(dir / "telemetry.csv");
  if (fnv1a(tele_text.data(), tele_text.size()) !=
      parse_hex(need(kv, "hash.telemetry.csv"))) {
    throw DataError("checkpoint telemetry does not match its manifest");
  }
  std::istringstream tele(tele_text);
  ck.telemetry = read_telemetry(tele);
  if (static_cast<int>(ck.telemetry.size()) != ck.iter) {
    throw DataError("checkpoint telemetry length differs from its iteration");
  }
  return ck;
}

ParamSet load_diffusion_params(const fs::path& dir, TrainConfig* config) {
  Checkpoint ck = load_checkpoint(dir);
  if (config != nullptr) *config = ck.config;
  return std::move(ck.theta_d);
}

Trainer Trainer::resume(const fs::path& checkpoint, const TrainConfig& config,
                        std::vector<SignalPair> corpus) {
  Checkpoint ck = load_checkpoint(checkpoint);
  if (ck.config.hash() != config.hash()) {
    throw ConfigError("config hash " + hex64(config.hash()) +
                      " does not match checkpoint " + hex64(ck.config.hash()));
  }
  Trainer tr(config, std::move(corpus));
  if (corpus_hash(tr.corpus_) != ck.corpus_hash) {
    throw DataError("training corpus differs from the checkpointed run");
  }
  tr.theta_d_ = std::move(ck.theta_d);
  tr.theta_v_ = std::move(ck.theta_v);
  tr.adam_d_.restore(ck.adam_d_steps, std::move(ck.adam_d_m), std::move(ck.adam_d_v));
  tr.adam_v_.restore(ck.adam_v_steps, std::move(ck.adam_v_m), std::move(ck.adam_v_v));
  tr.guard_ = ck.guard;
  tr.iter_ = ck.iter;
  tr.telemetry_ = std::move(ck.telemetry);
  return tr;
}

Trainer Trainer::branch(const fs::path& checkpoint, const TrainConfig& config,
                        std::vector<SignalPair> corpus) {
  Checkpoint ck = load_checkpoint(checkpoint);
  if (ck.config.phase1_hash() != config.phase1_hash()) {
    throw ConfigError("warm-up settings differ from the checkpointed run");
  }
  if (ck.iter != config.n_th) {
    throw ConfigError("branching needs a checkpoint at iteration n_th = " +
                      std::to_string(config.n_th) + ", found " +
                      std::to_string(ck.iter));
  }
  Trainer tr(config, std::move(corpus));
  if (corpus_hash(tr.corpus_) != ck.corpus_hash) {
    throw DataError("training corpus differs from the checkpointed run");
  }
  tr.theta_d_ = std::move(ck.theta_d);
  tr.adam_d_.restore(ck.adam_d_steps, std::move(ck.adam_d_m), std::move(ck.adam_d_v));
  tr.guard_ = ck.guard;
  tr.iter_ = ck.iter;
  tr.telemetry_ = std::move(ck.telemetry);
  return tr;
}

}  // namespace mose
