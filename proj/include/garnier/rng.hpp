#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "garnier/mat2.hpp"

namespace garnier {

/// Seeded generator with a platform-independent mapping to doubles, so that
/// seeds reproduce bit-for-bit across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Complex number with independent standard normal parts scaled by `scale`.
  Cx complex_normal(double scale = 1.0) { return {scale * normal(), scale * normal()}; }

  /// Uniform in the rectangle [re_lo, re_hi] x [im_lo, im_hi].
  Cx complex_box(double re_lo, double re_hi, double im_lo, double im_hi) {
    const double re = uniform(re_lo, re_hi);
    return {re, uniform(im_lo, im_hi)};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace garnier
