#include "w2lab/parallel.hpp"

#include <algorithm>

namespace w2lab {

namespace {
std::atomic<int> g_threads{0};

int effective_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(n, 1);
}
}  // namespace

void set_num_threads(int n) noexcept { g_threads.store(n, std::memory_order_relaxed); }
int num_threads() noexcept { return effective_threads(); }

std::size_t parallel_chunk_count(std::size_t n) noexcept {
  // Fixed fan-out independent of the thread count.
  return std::min<std::size_t>(n, 128);
}

void parallel_for_chunked(
    std::size_t n,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t chunks = parallel_chunk_count(n);
  const std::size_t base = n / chunks, rem = n % chunks;
  auto bounds = [&](std::size_t c) {
    const std::size_t lo = c * base + std::min(c, rem);
    return std::pair<std::size_t, std::size_t>{lo, lo + base + (c < rem ? 1 : 0)};
  };

  const int workers = std::min<std::size_t>(effective_threads(), chunks);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      auto [lo, hi] = bounds(c);
      fn(lo, hi, c);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= chunks || failed.load(std::memory_order_relaxed)) return;
      try {
        auto [lo, hi] = bounds(c);
        fn(lo, hi, c);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  if (failed.load()) std::rethrow_exception(error);
}

double parallel_sum(std::size_t n,
                    const std::function<double(std::size_t, std::size_t)>& fn) {
  const std::size_t chunks = parallel_chunk_count(n);
  std::vector<double> partial(chunks, 0.0);
  parallel_for_chunked(n, [&](std::size_t lo, std::size_t hi, std::size_t c) {
    partial[c] = fn(lo, hi);
  });
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

}  // namespace w2lab
