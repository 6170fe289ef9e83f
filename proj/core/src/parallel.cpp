#include "lagcast/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <algorithm>
#include <vector>

#include "lagcast/text.hpp"

namespace lagcast {

namespace {
std::atomic<std::size_t> g_override{0};
// Nested loops run inline on the calling worker; the outer loop already
// saturates the pool.
thread_local bool t_in_worker = false;
}  // namespace

void set_thread_count(std::size_t n) { g_override = n; }

std::size_t thread_count() {
  std::size_t n = g_override;
  if (n > 0) return n;
  if (const char* env = std::getenv("LAGCAST_THREADS")) {
    if (auto v = parse_int(env); v && *v > 0) n = static_cast<std::size_t>(*v);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, std::size_t threads) {
  if (threads == 0) threads = thread_count();
  threads = std::min(threads, n);
  if (threads <= 1 || t_in_worker) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    t_in_worker = true;
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace lagcast
