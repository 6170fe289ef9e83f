#pragma once

#include <cstddef>
#include <functional>

namespace lagcast {

// Worker count from LAGCAST_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();
// Process-wide override; 0 restores the environment/hardware default.
void set_thread_count(std::size_t n);

// Calls fn(i) for i in [0, n) on up to `threads` workers. Each index is
// handled exactly once; callers write results into per-index slots so the
// merged output does not depend on scheduling. The first exception thrown
// (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

}  // namespace lagcast
