#pragma once

#include <cstdint>
#include <functional>

namespace vortexgas {

/// Worker cap: VORTEXGAS_THREADS if set (>=1), else hardware concurrency.
int thread_budget();

/// Run fn(i) for i in [0, n) on up to thread_budget() workers (static block
/// partition). Tasks must be independent: each writes its own output slot.
/// Reductions are then done by the caller in index order, so results never
/// depend on the worker count.
void parallel_for(long long n, const std::function<void(long long)>& fn);

}  // namespace vortexgas
