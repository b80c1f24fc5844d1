#pragma once

#include <cstddef>
#include <functional>

namespace event_warp {

/// Worker count: EVENT_WARP_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
[[nodiscard]] unsigned worker_count();

/// Calls body(i) for every i in [0, n), spread over up to worker_count()
/// threads. Bodies must write only to disjoint state. The first exception
/// thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace event_warp
