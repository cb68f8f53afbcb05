#pragma once

#include <cstdint>
#include <functional>

namespace lvc {

// Number of worker threads (LVC_THREADS env var, else hardware concurrency).
int thread_count();

// Runs fn over disjoint index ranges [begin,end) covering [0,n).
// Partitioning depends only on n and the thread count, so results of
// disjoint-write loops are identical across runs.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace lvc
