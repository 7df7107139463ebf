#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace epichaos {

/// Identifies one reproducible random stream: a master seed plus a stream id.
/// Identical pairs give bit-identical streams; distinct pairs are independent
/// for all practical purposes.
struct SeedSpec {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  /// Derived stream keyed by (this, key). Used to fan out per replica / agent.
  SeedSpec child(std::uint64_t key) const noexcept;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// 64-bit finalizer used to derive engine seeds from stream keys.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// A Mersenne-twister engine seeded from a SeedSpec, plus the handful of
/// variates the simulators need. Variates are computed from raw engine words
/// so sequences do not depend on the standard library's distribution code.
class RandomStream {
 public:
  explicit RandomStream(SeedSpec seed);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer on [0, n). Unbiased (rejection on the top range).
  std::uint64_t below(std::uint64_t n) noexcept;

  double exponential(double rate) noexcept { return -std::log1p(-uniform()) / rate; }

  /// Heading uniform on the circle.
  double angle() noexcept;

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Uniform heading in [0, 2pi).
inline double sample_velocity(RandomStream& rng) noexcept { return rng.angle(); }

}  // namespace epichaos
