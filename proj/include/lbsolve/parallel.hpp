#pragma once

#include <cstddef>
#include <functional>

namespace lbs {

// Worker count used by parallel_for. Defaults to LBSOLVE_THREADS or 1.
int thread_count();
void set_thread_count(int n);

// Calls body(i) for i in [0, n). Each index is handled by exactly one
// thread, so per-index results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace lbs
