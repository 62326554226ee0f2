#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace groupoid {

/// Seeded generator with a platform-independent stream: mt19937_64's output
/// sequence is fixed by the standard, and the conversions below avoid the
/// implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in the complex unit square [0,1) × [0,1).
  std::complex<double> unit_square() {
    const double re = uniform();
    const double im = uniform();
    return {re, im};
  }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    // rejection keeps the stream unbiased
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do v = engine_();
    while (v >= limit);
    return static_cast<std::size_t>(v % n);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace groupoid
