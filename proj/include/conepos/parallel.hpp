#pragma once

#include <cstddef>
#include <functional>

namespace conepos {

/// Worker count: an explicit positive request wins, then CONEPOS_THREADS,
/// then the hardware concurrency.
int resolve_threads(int requested);

/// Runs body(i) for i in [0, count) on up to `threads` workers. Work is
/// handed out in contiguous blocks, so callers writing into slot i get
/// results independent of the thread count.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace conepos
