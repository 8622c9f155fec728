// parallel.hpp: fixed-order fan-out over an index range

#pragma once

#include <cstddef>
#include <functional>

namespace workmoments {

/// Worker count: WORKMOMENTS_THREADS if set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls fn(i) for every i in [0, n) using up to `workers` threads (0 means
/// worker_count()). Indices are handed out dynamically; callers write results
/// into slot i so the outcome never depends on scheduling. The first exception
/// thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t workers = 0);

} // namespace workmoments
