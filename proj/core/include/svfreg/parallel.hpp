#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace svfreg {

/// Worker count: SVFREG_THREADS caps it, 0 or unset means all cores.
unsigned worker_count();

/// Runs fn(begin, end) over a partition of [0, n). Each range is touched by
/// exactly one worker, so writes to disjoint output slots are race-free and
/// the result does not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

/// Deterministic sum of f(i) over [0, n): partial sums are accumulated per
/// fixed-size chunk and the chunk results added in index order, so the
/// reduction tree is independent of the worker count.
double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f);

}  // namespace svfreg
