#pragma once

#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace conjugen {

/// Thread cap from CONJUGEN_THREADS (>= 1); defaults to 1 when unset.
inline int thread_cap() {
  const char* env = std::getenv("CONJUGEN_THREADS");
  if (!env) return 1;
  int v = 0;
  try {
    v = std::stoi(env);
  } catch (const std::exception&) {
    throw std::invalid_argument("CONJUGEN_THREADS must be an integer >= 1");
  }
  if (v < 1) throw std::invalid_argument("CONJUGEN_THREADS must be an integer >= 1");
  return v;
}

/// Static block partition of [0, count) over at most `threads` workers.
/// Deterministic: the partition depends only on count and threads.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace conjugen
