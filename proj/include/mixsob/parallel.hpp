#pragma once

#include <cstddef>
#include <functional>

namespace mixsob {

/// Worker count used by parallel_for. Defaults to hardware concurrency.
void set_thread_count(unsigned k);
unsigned thread_count();

/// Runs body(begin, end) over disjoint contiguous blocks of [0, n).
/// Each index is visited by exactly one block, so per-index results do not
/// depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mixsob
