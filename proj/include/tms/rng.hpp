#pragma once

// Seeded randomness helpers.  mt19937_64 output is specified bit-for-bit by
// the standard, but the std distributions are not, so uniform doubles and
// discrete draws are derived from raw bits here to keep runs byte-stable
// across platforms.

#include <cstdint>
#include <random>
#include <span>

#include "tms/errors.hpp"

namespace tms {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Index drawn proportionally to the (nonnegative) weights.
  std::size_t discrete(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0))
      throw SamplerDegenerateError("discrete draw with zero total weight");
    double u = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  std::uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace tms
