#pragma once

#include <cstddef>
#include <functional>

namespace spermmorph {

/// Worker count from MORPH_THREADS (>= 1), or the hardware concurrency when unset.
int thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work items are
/// independent; results must not depend on the schedule.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    parallel_for(n, thread_count(), body);
}

}  // namespace spermmorph
