#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace inductgcn {

// Seeded generator with portable draws. The std distributions are
// implementation-defined, so bounded integers and reals are derived from the
// raw mt19937_64 stream here to keep runs reproducible across standard
// libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, n). Rejection sampling avoids modulo bias.
  std::size_t uniform_index(std::size_t n) {
    if (n <= 1) {
      return 0;
    }
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) {
      x = engine_();
    }
    return static_cast<std::size_t>(x % bound);
  }

  // Uniform real in [0, 1) with 53 bits of mantissa.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin() { return (engine_() >> 63) != 0; }

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[uniform_index(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

} // namespace inductgcn
