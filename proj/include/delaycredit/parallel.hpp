#pragma once

#include <cstddef>
#include <functional>

namespace delaycredit {

/// Worker count: DELAYCREDIT_THREADS if set (>=1), else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) across workers. Each index is processed exactly
/// once; callers must write results into index-addressed slots so the outcome
/// is independent of scheduling. Exceptions are captured and rethrown (first
/// index wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace delaycredit
