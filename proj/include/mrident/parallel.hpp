#pragma once

#include <cstddef>
#include <functional>

namespace mrident {

/// Number of worker threads: MRIDENT_THREADS if set, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, count). Work items must be independent and write
/// only their own output slots, so results are identical for any thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace mrident
