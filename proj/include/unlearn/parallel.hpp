#pragma once

#include <cstddef>
#include <functional>

namespace unlearn {

// Number of workers: `requested` if > 0, else UNLEARN_THREADS, else the
// hardware concurrency.
int resolve_threads(int requested);

// Runs fn(0..count-1) on `threads` workers pulling indices from a shared
// atomic counter. Exceptions are captured and the first one is rethrown on
// the calling thread after all workers join. Result placement is the
// callee's business (write-once slots keyed by index keep it deterministic).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace unlearn
