#pragma once

#include <cstddef>
#include <functional>

namespace oscilla {

// Worker count: OSCILLA_THREADS if set and positive, else hardware concurrency.
unsigned worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
// so bodies that write only to their own index range need no locking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace oscilla
