#pragma once

// Seedable randomness built on std::mt19937_64. The uniform and Gaussian
// helpers are hand-rolled from raw engine words so that sampled streams are
// identical wherever the engine is (the standard fixes mt19937_64's output,
// but not the library distributions').

#include <complex>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace chex {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one sample per call, no cached spare.
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Complex with independent standard-normal real and imaginary parts.
  std::complex<double> complex_gaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return {re, im};
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace chex
