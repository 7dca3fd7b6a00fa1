#pragma once

#include <cstddef>
#include <functional>

namespace ctnet {

// Process-wide worker count for data-parallel kernels. Work is always split
// into fixed blocks with one owner per output element, so results are bitwise
// identical for any thread count.
void set_threads(int n);
int threads();

// Runs fn(block_index) for block_index in [0, blocks). Blocks may execute on
// different threads; each block must write disjoint outputs.
void parallel_for(std::size_t blocks, const std::function<void(std::size_t)>& fn);

}  // namespace ctnet
