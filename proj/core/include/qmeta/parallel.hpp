#pragma once

#include <cstddef>
#include <functional>

namespace qmeta {

/// Worker count: QMETA_THREADS when set (>= 1), else hardware concurrency.
int default_thread_count();

/// Calls body(i) for i in [0, n) on up to `threads` workers (0 = default).
/// Work is handed out by index; callers write results into per-index slots,
/// so the outcome never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace qmeta
