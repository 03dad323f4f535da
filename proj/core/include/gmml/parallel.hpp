#pragma once

#include <cstdint>
#include <functional>

namespace gmml {

/// Resolves the worker count for a parallel region: `requested` if positive,
/// otherwise hardware concurrency, in both cases capped by the GMML_THREADS
/// environment variable when it is set to a positive integer.
int resolve_threads(int requested);

/// Runs fn(i) for i in [0, n) across `threads` workers (resolved as above).
/// Iterations are handed out in contiguous blocks; with one worker the loop
/// runs inline on the calling thread. Exceptions from workers are rethrown.
void parallel_for(std::int64_t n, int threads,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace gmml
