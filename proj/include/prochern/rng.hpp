#pragma once

#include <cstdint>

namespace prochern {

// Deterministic RNG (splitmix64).  std::uniform_int_distribution is
// implementation-defined, which would break byte-identical reports across
// toolchains, so the uniform draw is done by hand.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [lo, hi], inclusive.  Debiased by rejection.
  long long range(long long lo, long long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<long long>(next()); // full 64-bit range
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t v = next();
    while (v >= limit) v = next();
    return lo + static_cast<long long>(v % span);
  }

  bool chance(unsigned percent) { return range(0, 99) < static_cast<long long>(percent); }

  Rng fork() { return Rng(next()); }

private:
  std::uint64_t state_;
};

} // namespace prochern
