#pragma once

#include <atomic>
#include <thread>
#include <vector>

namespace coxkl {

/// Runs fn(0..n-1) across `jobs` threads. Tasks must write only their own
/// output slots; results are then independent of scheduling.
template <class Fn>
void parallel_for(int jobs, int n, Fn&& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
  };
  std::vector<std::thread> threads;
  const int count = std::min(jobs, n);
  threads.reserve(count);
  for (int t = 0; t < count; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
}

}  // namespace coxkl
