#pragma once

#include <cstddef>
#include <functional>

namespace rcnkit {

// Runs fn(i) for i in [0, count). With threads <= 1 the loop is serial.
// Tasks must write disjoint state; outputs are then identical for any
// thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

int hardware_threads();

}  // namespace rcnkit
