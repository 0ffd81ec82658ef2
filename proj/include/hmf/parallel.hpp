#pragma once

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace hmf {

// Worker count from HMF_THREADS, else the hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("HMF_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return static_cast<unsigned>(n);
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Calls fn(i) for i in [0, n), strided over the workers.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const unsigned w = static_cast<unsigned>(std::min<std::size_t>(thread_count(), std::max<std::size_t>(n, 1)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < w; ++k)
    pool.emplace_back([&, k] {
      for (std::size_t i = k; i < n; i += w) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace hmf
