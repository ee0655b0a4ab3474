#pragma once

#include <cstddef>
#include <functional>

namespace semaxis {

/// Worker count: explicit request if nonzero, else SEMAXIS_THREADS if set and
/// nonzero, else the hardware concurrency.
unsigned thread_count(unsigned requested = 0);

/// Runs fn(i) for i in [0, n). Work is claimed dynamically but every index
/// writes only its own result slot, so output never depends on scheduling.
/// The first exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  unsigned threads = 0);

}  // namespace semaxis
