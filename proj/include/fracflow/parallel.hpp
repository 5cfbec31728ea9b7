#pragma once

#include <cstddef>
#include <functional>

namespace fracflow {

// Worker count used by parallel loops (default 1). Results never depend on it: loops write
// disjoint slots and reductions run serially afterwards.
void set_thread_count(int n);
int thread_count();

// Calls body(begin, end) on contiguous chunks of [0, n).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace fracflow
