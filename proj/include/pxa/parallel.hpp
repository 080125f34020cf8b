#pragma once

#include <cstddef>
#include <functional>

namespace pxa {

// Worker count used by the parallel loops below. 0 selects the hardware
// concurrency. Results never depend on this value.
void set_thread_count(int threads);
int thread_count();

// Splits [begin, end) into contiguous chunks and runs body(lo, hi) on each,
// possibly concurrently. Chunks never overlap, so bodies that write only to
// their own index range are race free and deterministic.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace pxa
