#include "fidkit/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fidkit::par {

namespace {

std::atomic<int> g_override{0};

int env_threads() {
  if (const char* s = std::getenv("FIDKIT_THREADS")) {
    const int n = std::atoi(s);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

int threads() {
  const int n = g_override.load(std::memory_order_relaxed);
  return n >= 1 ? n : env_threads();
}

void set_threads(int n) { g_override.store(n, std::memory_order_relaxed); }

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t nt =
      std::min<std::size_t>(static_cast<std::size_t>(threads()), n);
  if (nt <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t w = 0; w < nt; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fidkit::par
