#pragma once

#include <cstddef>
#include <functional>

namespace mcqa {

/// Worker count from MCQA_THREADS (0 or unset = hardware concurrency).
std::size_t default_thread_count();

/// Resolves a requested thread count: 0 means default_thread_count().
std::size_t resolve_threads(std::size_t requested);

/// Calls body(i) for every i in [0, n) using up to `threads` workers.
/// Indices are split into contiguous blocks; the first exception thrown by
/// any worker (lowest block first) is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

} // namespace mcqa
