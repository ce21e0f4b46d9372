#include "qtwist/parallel.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace qtwist {

namespace {
std::atomic<unsigned> g_threads{0};

double tree_sum_range(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n == 1) return v[0];
  if (n == 2) return v[0] + v[1];
  const std::size_t half = n / 2;
  return tree_sum_range(v, half) + tree_sum_range(v + half, n - half);
}
}  // namespace

void set_num_threads(unsigned n) { g_threads.store(n); }

unsigned num_threads() {
  unsigned n = g_threads.load();
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

void parallel_for_chunks(std::size_t num_chunks, const std::function<void(std::size_t)>& body) {
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(num_threads(), num_chunks));
  if (workers <= 1) {
    for (std::size_t i = 0; i < num_chunks; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= num_chunks) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(num_chunks);
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

double tree_sum(std::span<const double> values) { return tree_sum_range(values.data(), values.size()); }

double parallel_sum(std::size_t n, std::size_t chunk, const std::function<double(std::size_t)>& f) {
  const ChunkPlan plan{n, chunk};
  std::vector<double> partial(plan.count(), 0.0);
  parallel_for_chunks(plan.count(), [&](std::size_t c) {
    double s = 0.0;
    for (std::size_t i = plan.begin(c); i < plan.end(c); ++i) s += f(i);
    partial[c] = s;
  });
  return tree_sum(partial);
}

}  // namespace qtwist
