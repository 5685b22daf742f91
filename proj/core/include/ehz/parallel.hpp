#pragma once

#include <cstdint>
#include <functional>

namespace ehz {

/// Number of worker threads for `tasks` independent jobs: hardware
/// concurrency, capped by the BILLIARD_THREADS environment variable.
int worker_count(int tasks);

/// Run fn(0..count-1) on up to worker_count(count) threads. Each index runs
/// exactly once; calls from inside another parallel_for run inline. If any
/// call throws, the exception of the lowest failing index is rethrown after
/// all workers finish.
void parallel_for(int count, const std::function<void(int)>& fn);

/// Independent per-task seed derived from a base seed (SplitMix64 mixing).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace ehz
