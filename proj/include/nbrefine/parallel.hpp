#pragma once

#include <cstddef>
#include <functional>

namespace nbr {

// Worker count used by per-row loops. 0 means hardware concurrency.
void set_num_threads(std::size_t n);
std::size_t num_threads();

// Runs body(i) for i in [0, n) over contiguous chunks. Callers only write to
// slots owned by i, so results do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nbr
