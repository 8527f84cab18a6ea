#pragma once

#include <cstddef>
#include <functional>

namespace ehspc {

/// Worker count from EHSPC_WORKERS, else std::thread::hardware_concurrency().
int default_workers();

/// Runs fn(i) for i in [0, n_tasks) on up to `workers` threads. Tasks are
/// claimed dynamically, so callers must write results by task index. The first
/// exception thrown by any task is rethrown after all threads join.
void parallel_for(std::size_t n_tasks, int workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace ehspc
