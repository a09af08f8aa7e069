#pragma once

#include <cstddef>
#include <functional>

namespace conic_lmcf {

/// Worker cap: CONIC_LMCF_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is visited
/// exactly once; body must only write state owned by index i.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace conic_lmcf
