#pragma once

#include <cstdint>
#include <limits>

namespace sarc {

// Counter-based generator: the k-th output is a pure function of (key, k),
// so any stream can be replayed or positioned without stepping through it.
// Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, n); n must be positive.
  std::int64_t uniform_index(std::int64_t n);
  // Standard normal via Box-Muller; consumes two counters per call.
  double normal();

  std::uint64_t counter() const { return counter_; }
  std::uint64_t key() const { return key_; }
  void seek(std::uint64_t counter) { counter_ = counter; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace sarc
