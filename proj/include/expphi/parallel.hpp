#pragma once

#include <cstddef>
#include <functional>

namespace expphi {

/// Runs task(i) for i in [0, count) on up to `threads` workers.
/// Tasks must write only to slots owned by their index, which keeps results
/// independent of scheduling. If any task throws, the exception of the
/// lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

// threads <= 0 means hardware concurrency.
int resolve_threads(int threads);

}  // namespace expphi
