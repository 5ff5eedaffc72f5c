#pragma once

#include <cstddef>
#include <functional>

namespace urn {

/// Runs fn(i) for i in [0, n) on `threads` workers. Work items must be
/// independent; callers that aggregate do so afterwards in index order, so
/// results never depend on the thread count. threads <= 1 runs inline.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Thread count resolution: explicit value if > 0, else URN_THREADS env var, else 1.
int resolve_threads(int requested);

}  // namespace urn
