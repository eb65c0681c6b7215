#pragma once

#include <cstddef>
#include <functional>

namespace synthscreen::cli {

/// Runs body(i) for i in [0, n) on up to `threads` workers. Work is claimed
/// dynamically; callers write results into per-index slots.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Flag value if positive, else SYNTHSCREEN_THREADS, else hardware concurrency.
unsigned resolve_threads(int flag_value);

}  // namespace synthscreen::cli
