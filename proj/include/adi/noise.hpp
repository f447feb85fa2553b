#pragma once

// Counter-based random streams. Every draw is a pure function of
// (seed, stream, step, key, slot), so components never perturb each other's
// randomness and results do not depend on iteration order.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace adi {

enum class Stream : std::uint64_t {
  NcSensor = 1,
  ScSensorPrimary = 2,
  ScSensorStandby = 3,
  NcDiagnosis = 4,
  FaultCorruption = 5,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class NoiseSource {
 public:
  constexpr NoiseSource(std::uint64_t seed, Stream stream)
      : base_(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)))) {}

  /// Uniform in [0, 1).
  double uniform(std::int64_t step, std::int64_t key, std::uint64_t slot = 0) const {
    std::uint64_t h = splitmix64(base_ ^ static_cast<std::uint64_t>(step));
    h = splitmix64(h ^ static_cast<std::uint64_t>(key));
    h = splitmix64(h ^ slot);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  double uniform(std::int64_t step, std::int64_t key, std::uint64_t slot, double lo, double hi) const {
    return lo + (hi - lo) * uniform(step, key, slot);
  }

  /// Standard normal via Box-Muller; consumes slots (2*slot, 2*slot+1).
  double normal(std::int64_t step, std::int64_t key, std::uint64_t slot) const {
    const double u1 = 1.0 - uniform(step, key, 2 * slot); // (0, 1]
    const double u2 = uniform(step, key, 2 * slot + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(std::int64_t step, std::int64_t key, double p) const {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform(step, key, 0) < p;
  }

 private:
  std::uint64_t base_;
};

}  // namespace adi
