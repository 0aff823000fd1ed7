// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mose/config.h"
#include "mose/errors.h"
#include "mose/trainer.h"

using namespace mose;
namespace fs = std::filesystem;

namespace {

TrainConfig tiny() {
  TrainConfig c;
  c.n_total = 12;
  c.n_th = 6;
  c.batch = 2;
  c.d_channels = 8;
  c.d_blocks = 2;
  c.v_hidden = 16;
  c.guard_warmup = 3;
  return c;
}

std::vector<SignalPair> corpus() {
  CorpusOptions o;
  o.utterances = 4;
  o.length = 128;
  return synth_corpus(o);
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mose_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config text round trip and validation") {
  TrainConfig c = tiny();
  c.alpha = 0.1;
  c.metric = "seg_snr:64";
  c.update_order = UpdateOrder::kValueFirst;
  const TrainConfig back = TrainConfig::parse(c.serialize());
  CHECK(back.serialize() == c.serialize());
  CHECK(back.hash() == c.hash());
  CHECK(TrainConfig::parse("# comment\nalpha=2\n").alpha == 2.0);
  CHECK_THROWS_AS(TrainConfig::parse("nonsense=1\n"), ConfigError);
  CHECK_THROWS_AS(TrainConfig::parse("alpha=abc\n"), ConfigError);
  TrainConfig bad = tiny();
  bad.n_th = bad.n_total + 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = tiny();
  bad.gamma = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("warm-up hash ignores joint-phase settings") {
  TrainConfig a = tiny(), b = tiny();
  b.alpha = 5.0;
  b.lr_v = 1e-3;
  b.gamma = 0.5;
  CHECK(a.phase1_hash() == b.phase1_hash());
  CHECK(a.hash() != b.hash());
  b.lr_d_phase1 = 1e-2;
  CHECK(a.phase1_hash() != b.phase1_hash());
}

TEST_CASE("telemetry has one row per iteration and switches phase at n_th") {
  Trainer tr(tiny(), corpus());
  tr.run();
  const auto& rows = tr.telemetry();
  REQUIRE(rows.size() == 12);
  for (const TelemetryRow& r : rows) CHECK(r.phase == (r.iter < 6 ? 1 : 2));
  std::stringstream csv;
  write_telemetry(csv, rows);
  CHECK(read_telemetry(csv) == rows);
}

TEST_CASE("checkpoint round trip and resume") {
  const fs::path dir = scratch("ckpt");
  Trainer a(tiny(), corpus());
  a.run_until(8);
  a.save(dir);
  const Checkpoint ck = load_checkpoint(dir);
  CHECK(ck.iter == 8);
  CHECK(ck.theta_d.hash() == a.theta_d().hash());
  CHECK(ck.theta_v.hash() == a.theta_v().hash());
  CHECK(ck.guard == a.guard());

  TrainConfig other = tiny();
  other.alpha = 2.0;
  CHECK_THROWS_AS(Trainer::resume(dir, other, corpus()), ConfigError);
  auto changed = corpus();
  changed[0].y[0] += 0.01;
  CHECK_THROWS(Trainer::resume(dir, tiny(), changed));

  Trainer b = Trainer::resume(dir, tiny(), corpus());
  b.run();
  a.run();
  CHECK(b.telemetry() == a.telemetry());
  CHECK(b.theta_d().hash() == a.theta_d().hash());
  fs::remove_all(dir);
}

TEST_CASE("corrupted checkpoints are refused") {
  const fs::path dir = scratch("corrupt");
  Trainer a(tiny(), corpus());
  a.run_until(3);
  a.save(dir);
  {
    std::fstream f(dir / "theta_d.f32", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(16);
    f.put('\x7f');
  }
  CHECK_THROWS_AS(load_checkpoint(dir), DataError);
  fs::remove(dir / "theta_d.f32");
  CHECK_THROWS_AS(load_checkpoint(dir), DataError);
  CHECK_THROWS_AS(load_checkpoint(dir / "nope"), DataError);
  fs::remove_all(dir);
}

TEST_CASE("branching needs a warm-up checkpoint taken at n_th") {
  const fs::path dir = scratch("branch");
  Trainer warm(tiny(), corpus());
  warm.run_until(5);
  warm.save(dir / "early");
  warm.run_until(6);
  warm.save(dir / "at_nth");
  TrainConfig joint = tiny();
  joint.alpha = 0.5;
  CHECK_THROWS_AS(Trainer::branch(dir / "early", joint, corpus()), ConfigError);
  Trainer b = Trainer::branch(dir / "at_nth", joint, corpus());
  b.run();
  Trainer straight(joint, corpus());
  straight.run();
  CHECK(b.theta_d().hash() == straight.theta_d().hash());
  CHECK(b.theta_v().hash() == straight.theta_v().hash());
  CHECK(b.telemetry() == straight.telemetry());
  joint.lr_d_phase1 = 1.0;
  CHECK_THROWS_AS(Trainer::branch(dir / "at_nth", joint, corpus()), ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("divergence guard trips") {
  TrainConfig c = tiny();
  c.n_total = c.n_th = 60;
  c.lr_d_phase1 = 50.0;
  c.guard_warmup = 1;  // reference is the untrained L1
  Trainer tr(c, corpus());
  CHECK_THROWS_AS(tr.run(), NumericError);
}

TEST_CASE("alpha zero matches L1-only joint training bit for bit") {
  TrainConfig a = tiny();
  a.alpha = 0.0;
  TrainConfig b = a;
  b.elbo_only = true;
  Trainer ta(a, corpus()), tb(b, corpus());
  ta.run();
  tb.run();
  CHECK(ta.theta_d().hash() == tb.theta_d().hash());
  CHECK(ta.theta_v().hash() != tb.theta_v().hash());
}
