#pragma once

#include <cstddef>
#include <functional>

namespace chiralmag {

/// Caps the number of worker threads used by evaluators (default 1).
void set_thread_count(int n);
int thread_count();

/// Runs body(i) for i in [0, n). Iterations are split into contiguous chunks;
/// callers write into per-index slots and reduce afterwards in index order so
/// results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace chiralmag
