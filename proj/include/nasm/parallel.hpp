#pragma once

#include <cstddef>
#include <functional>

namespace nasm {

/// Worker count from NASM_THREADS, else the hardware concurrency (at least 1).
[[nodiscard]] unsigned default_thread_count();

/// Calls body(i) for i in [0, n) on up to `threads` workers. Indices are handed
/// out dynamically; with threads <= 1 the loop runs inline in order. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace nasm
