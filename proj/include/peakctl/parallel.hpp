#pragma once

#include <functional>

namespace peakctl {

// Runs fn(0..n-1) on up to n_threads workers (0 = hardware concurrency).
// Results must be written to disjoint slots; ordering of execution is
// unspecified but every index runs exactly once.
void parallel_for(int n, int n_threads, const std::function<void(int)>& fn);

}  // namespace peakctl
