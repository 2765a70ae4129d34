#pragma once

#include <cstddef>
#include <functional>

namespace pnnsr {

/// Worker count for a requested `threads` value (0 = hardware concurrency).
unsigned resolve_threads(unsigned threads);

/// Runs fn(begin, end) over contiguous blocks of [0, n) on up to `threads`
/// workers. Blocks write disjoint outputs, so results never depend on the
/// worker count. The first exception thrown by any block is rethrown.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace pnnsr
