#pragma once

#include <cstddef>
#include <functional>

namespace kshs {

/// Worker count from KSHS_THREADS (if set and positive), else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Each index is visited exactly once; results must be written to
/// per-index slots so output never depends on scheduling. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace kshs
