#pragma once

#include <cstddef>
#include <functional>

namespace hgcml {

/// Worker cap: HGCML_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// handled exactly once, so writes to per-index slots stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hgcml
