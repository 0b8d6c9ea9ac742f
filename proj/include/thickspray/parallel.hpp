#pragma once

#include <cstddef>
#include <functional>

namespace thickspray {

/// Worker count used by parallel_for. Defaults to 1.
void set_thread_count(int n);
int thread_count();

/// Static partition of [0, n) into contiguous chunks, one per worker.
/// The partition depends only on n and the thread count, so per-chunk
/// partial results combined in chunk order are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace thickspray
