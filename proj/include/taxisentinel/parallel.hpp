#pragma once

#include <cstddef>
#include <functional>

namespace taxisentinel {

// Worker count from TAXI_SENTINEL_THREADS, else hardware concurrency (>= 1).
std::size_t worker_count();

// Runs body(block) for block in [0, n_blocks) across worker_count() threads.
// Blocks are claimed dynamically, so bodies must write only to block-owned
// output; callers reduce in block order afterwards for deterministic results.
void parallel_for_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& body);

}  // namespace taxisentinel
