#pragma once
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>

namespace mpfem {

// Invalid user input: bad config, bad format name, impossible mesh request.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested verification failed (bound violated, tolerance exceeded).
struct CheckError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic RNG. Every randomized result records the seed that produced it,
// so runs with equal seed and config are reproducible bit-for-bit.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  uint64_t next() { return eng_(); }
  // Uniform on [a, b), 53-bit resolution.
  double uniform(double a, double b) {
    double u01 = double(eng_() >> 11) * 0x1.0p-53;
    return a + (b - a) * u01;
  }
  // Uniform integer in [0, n).
  int uniform_int(int n) { return int(eng_() % uint64_t(n)); }

 private:
  std::mt19937_64 eng_;
};

// Worker cap from MPFEM_THREADS (0 or unset means hardware concurrency).
int thread_count();

// Runs fn(i) for i in [0, n), split across workers. Each index must write only
// its own outputs; results are then independent of the schedule.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace mpfem
