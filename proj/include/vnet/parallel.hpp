#pragma once

#include <cstddef>
#include <functional>

namespace vnet {

// Worker count used by parallel_for: VNET_THREADS env var if set, else
// hardware_concurrency. Result is clamped to [1, 64].
int worker_count();
void set_worker_count(int n); // overrides the env var (CLI --threads)

// Runs f(i) for i in [0, n). Work is split into fixed contiguous chunks so
// every invocation writes only its own output slots; results must not depend
// on execution order. Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

} // namespace vnet
