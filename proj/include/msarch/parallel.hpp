#pragma once

#include <cstddef>
#include <functional>

namespace msarch {

/// Worker count: MSARCH_THREADS if set to a positive integer, else the hardware concurrency.
unsigned thread_count();

/// Calls body(k) for k in [0, n) on up to thread_count() threads. The first
/// exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace msarch
