#pragma once

#include <cstddef>
#include <functional>

namespace diproperm {

/// Runs body(i) for i in [0, count) on up to `workers` threads. Tasks are
/// pulled in index order; callers write results into per-index slots so the
/// output never depends on the worker count. The first exception thrown (by
/// lowest index) is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace diproperm
