#pragma once

#include <functional>

namespace sob {

// Global cap on worker threads (CLI --threads). 0 = hardware concurrency.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, count). Work is split into contiguous blocks, one
// per worker; fn must be safe to call concurrently for distinct i. Outputs
// must not depend on the schedule.
void parallel_for(int count, const std::function<void(int)>& fn);

} // namespace sob
