// Copyright 2026 The MOSE Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace mose {

// Worker count: MOSE_THREADS if set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int thread_count();

// Calls fn(i) for i in [0, n) over up to thread_count() threads. Each index
// runs exactly once; callers write results to per-index slots so the output
// does not depend on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace mose
