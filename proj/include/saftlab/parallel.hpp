#pragma once

#include <cstddef>
#include <functional>

namespace saftlab {

/// Worker count used by parallel_for. 0 restores the default (hardware
/// concurrency).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index is handled by exactly one worker
/// and the work split depends only on n and the thread count, so results that
/// are written per index are independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace saftlab
