#include <ehz/parallel.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace ehz {

namespace {
// Set on pool threads so that nested parallel_for calls run inline instead of
// oversubscribing the machine.
thread_local bool in_worker = false;
}  // namespace

int worker_count(int tasks) {
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("BILLIARD_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) workers = std::min(workers, cap);
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
  return std::max(1, std::min(workers, tasks));
}

void parallel_for(int count, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = in_worker ? 1 : worker_count(count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto run = [&](int i) {
    try {
      fn(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (workers == 1) {
    for (int i = 0; i < count; ++i) run(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        in_worker = true;
        for (int i = next++; i < count; i = next++) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ehz
