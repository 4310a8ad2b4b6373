#include "sarc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sarc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(seed ^ mix64(stream + kGolden))) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::int64_t CounterRng::uniform_index(std::int64_t n) {
  if (n <= 0) throw std::invalid_argument("uniform_index needs n > 0");
  // Multiply-shift (Lemire); bias is below 2^-64 * n.
  const unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * static_cast<std::uint64_t>(n);
  return static_cast<std::int64_t>(prod >> 64);
}

double CounterRng::normal() {
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace sarc
