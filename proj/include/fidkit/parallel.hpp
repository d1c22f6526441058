#pragma once

#include <cstddef>
#include <functional>

namespace fidkit::par {

// Worker count: FIDKIT_THREADS env var if set (clamped to >= 1), else
// hardware concurrency. set_threads overrides both (0 restores the default).
int threads();
void set_threads(int n);

// Runs fn(begin, end) over contiguous chunks of [0, n), one chunk per
// worker. Results must be written to disjoint, pre-sized slots so the
// output is identical for every thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace fidkit::par
