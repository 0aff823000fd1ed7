// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0
//
// Runs the acceptance checks and prints one line per criterion. Exit status
// is 0 only when every selected criterion passes.
//
//   mose_acceptance [--only 1,2,...] [--work DIR]

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mose/verify.h"

namespace fs = std::filesystem;
using mose::verify::Verdict;

int main(int argc, char** argv) {
  std::set<int> only;
  fs::path work = fs::temp_directory_path() / "mose_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
    } else if (arg == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: mose_acceptance [--only 1,2,...] [--work DIR]\n";
      return 2;
    }
  }
  auto wanted = [&](int id) { return only.empty() || only.count(id) > 0; };
  fs::create_directories(work);
  auto log = [](const std::string& s) { std::cerr << "  " << s << "\n"; };

  namespace v = mose::verify;
  struct Check {
    int id;
    const char* name;
    double budget;
    std::function<Verdict()> fn;
  };
  const std::vector<Check> checks = {
      {1, "schedule", 1.0, v::criterion_schedule},
      {2, "w=0 reduction", 5.0, v::criterion_reduction},
      {3, "marginal consistency", 120.0, v::criterion_marginal_consistency},
      {4, "gradients", 120.0, v::criterion_gradients},
      {5, "telescoping reward", 60.0, v::criterion_telescoping},
      {6, "phase discipline", 60.0, v::criterion_phase_discipline},
      {7, "alpha trend", 1800.0, [&] { return v::criterion_alpha_trend(work, log); }},
      // Needs the seed-0 checkpoints written by 7.
      {8, "loss/metric mismatch", 300.0, [&] { return v::criterion_mismatch(work); }},
      {9, "determinism", 120.0, v::criterion_determinism},
  };

  int failed = 0;
  for (const Check& c : checks) {
    if (!wanted(c.id)) continue;
    const Verdict r = v::timed(c.id, c.name, c.budget, c.fn);
    std::printf("[%s] %d %-22s %7.2fs/%gs  %s\n", r.pass ? "PASS" : "FAIL", r.id,
                r.name.c_str(), r.seconds, r.budget_seconds, r.detail.c_str());
    std::fflush(stdout);
    failed += !r.pass;
  }
  return failed == 0 ? 0 : 1;
}
