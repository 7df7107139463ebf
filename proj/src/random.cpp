#include "epichaos/random.hpp"

#include "epichaos/core.hpp"

namespace epichaos {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t key) const noexcept {
  return {master, mix64(stream ^ mix64(key + 0x632be59bd9b4e019ULL))};
}

RandomStream::RandomStream(SeedSpec seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.master),
                    static_cast<std::uint32_t>(seed.master >> 32),
                    static_cast<std::uint32_t>(seed.stream),
                    static_cast<std::uint32_t>(seed.stream >> 32)};
  engine_.seed(seq);
}

std::uint64_t RandomStream::below(std::uint64_t n) noexcept {
  if (n <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double RandomStream::angle() noexcept {
  const double a = kTwoPi * uniform();
  return a < kTwoPi ? a : 0.0;
}

}  // namespace epichaos
