#pragma once

#include <cstddef>
#include <functional>

namespace pcot {

/// Process-wide worker cap. 0 means hardware concurrency. Settable from
/// the CLI --threads flag or the PCOT_THREADS environment variable.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs fn(i) for i in [0, n). Work items are independent; callers that
/// reduce must write per-index results into a presized buffer and fold it
/// sequentially afterwards, which is what makes parallel and serial runs
/// bit-identical. `threads` = 0 uses the process-wide setting.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads = 0);

}  // namespace pcot
