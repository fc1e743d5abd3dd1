// SPDX-License-Identifier: Apache-2.0

#ifndef ALPC_PARALLEL_HPP
#define ALPC_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace alpc {

// 0 => hardware concurrency; always >= 1.
int resolve_threads(int requested);

// Runs fn(chunk_begin, chunk_end) on contiguous chunks of [begin, end),
// one chunk per worker. Chunks write disjoint outputs, so results are
// identical for every thread count.
void parallel_for(std::size_t begin, std::size_t end, int threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace alpc

#endif  // ALPC_PARALLEL_HPP
