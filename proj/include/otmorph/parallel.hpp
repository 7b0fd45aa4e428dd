#pragma once

#include <functional>

namespace otm {

// Worker count from OTMORPH_THREADS; unset, empty, "0" or "1" mean sequential
// deterministic execution (the per-slice work partitions are disjoint, so the
// parallel results are bitwise identical anyway).
int worker_thread_count();

// Runs body(0..count-1), chunked across worker_thread_count() threads; plain
// loop in sequential mode. Rethrows the first exception a worker raised.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace otm
