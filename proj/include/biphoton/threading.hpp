#pragma once

#include <functional>

// Deterministic data-parallel helper. Work is split into contiguous index
// chunks, one per worker; every index is processed by exactly one worker and
// callers keep a fixed reduction order per output element, so results are
// bit-identical for any worker count.

namespace biphoton {

/// Cap on worker threads used by parallel kernels (0 = hardware concurrency).
void set_max_threads(int threads);
int max_threads();

/// Run fn(begin_k, end_k) over a partition of [begin, end) into contiguous
/// chunks. threads == 0 uses the global cap.
void parallel_for(int begin, int end, const std::function<void(int, int)>& fn,
                  int threads = 0);

}  // namespace biphoton
