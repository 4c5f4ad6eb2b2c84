#include "skellam/parallel.hpp"

#include <atomic>

namespace skellam {

namespace {
std::atomic<unsigned> g_workers{0};
}

void set_worker_count(unsigned n) noexcept { g_workers.store(n); }

unsigned worker_count() noexcept {
  const unsigned n = g_workers.load();
  if (n != 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace skellam
