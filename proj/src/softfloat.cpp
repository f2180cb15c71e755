#include "mpfem/softfloat.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "mpfem/common.hpp"

namespace mpfem {

Fmt format_from_name(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (name == detail::kFormats[i].name) return Fmt(i);
  }
  throw ConfigError("unknown float format name: '" + std::string(name) +
                    "' (expected bf16, fp16, fp32 or fp64)");
}

int thread_count() {
  if (const char* env = std::getenv("MPFEM_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
      throw ConfigError("MPFEM_THREADS must be a nonnegative integer");
    }
    if (v > 0) return int(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : int(hw);
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mpfem
