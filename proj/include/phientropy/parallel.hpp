#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace phientropy {

/// Worker count: PHIENTROPY_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
/// visited exactly once; the first exception thrown by any body is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Index-ordered map; results do not depend on the number of workers.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace phientropy
