#include "svfreg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

namespace svfreg {

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SVFREG_THREADS")) {
    char* end = nullptr;
    long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) return std::min<unsigned>(hw, static_cast<unsigned>(cap));
  }
  return hw;
}

namespace {
thread_local bool g_inside_parallel_region = false;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  unsigned workers = worker_count();
  if (workers <= 1 || n < 2048 || g_inside_parallel_region) {
    fn(0, n);
    return;
  }
  // Fixed-size chunks handed out by an atomic counter. Output determinism
  // comes from callers writing disjoint slots, not from the schedule.
  const std::size_t chunk = std::max<std::size_t>(1024, n / (workers * 8));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    g_inside_parallel_region = true;
    for (;;) {
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= n) {
        g_inside_parallel_region = false;
        return;
      }
      fn(begin, std::min(begin + chunk, n));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

double parallel_sum(std::size_t n, const std::function<double(std::size_t)>& f) {
  if (n == 0) return 0.0;
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      const std::size_t lo = c * kChunk;
      const std::size_t hi = std::min(lo + kChunk, n);
      double s = 0.0;
      for (std::size_t i = lo; i < hi; ++i) s += f(i);
      partial[c] = s;
    }
  });
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

}  // namespace svfreg
