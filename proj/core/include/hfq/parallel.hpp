#pragma once

#include <cstddef>
#include <functional>

namespace hfq {

// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
// concurrency). Each index is visited exactly once; results must be written
// to per-index slots so output does not depend on scheduling. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t threads = 0);

}  // namespace hfq
