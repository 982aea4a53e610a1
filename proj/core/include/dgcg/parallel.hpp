#pragma once

#include <cstddef>
#include <functional>

namespace dgcg {

// Worker cap: min(hardware_concurrency, DGCG_THREADS) when the environment
// variable is set, hardware_concurrency otherwise.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Iterations are
// split into contiguous chunks with disjoint writes, so results do not depend
// on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dgcg
