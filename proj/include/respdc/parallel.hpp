#pragma once

#include <cstddef>
#include <functional>

namespace respdc {

// Process-wide worker count used by the map and grid operations (default: hardware concurrency).
void set_thread_count(unsigned n);
unsigned thread_count();

// Calls body(i) for i in [0, n). Indices are split into contiguous blocks, one per worker,
// so results written by index are independent of scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace respdc
