#ifndef WBIDF_RNG_HPP
#define WBIDF_RNG_HPP

#include <cstdint>
#include <random>

namespace wbidf {

/// Seeded generator with a platform-independent output stream.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++
/// standard. Distributions are derived here rather than through
/// <random>'s distribution classes, whose algorithms are unspecified and
/// differ between standard libraries.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n), n >= 1. Multiply-shift on the top 32
  /// bits; bias is below 2^-32 * n.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(((engine_() >> 32) * n) >> 32);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace wbidf

#endif  // WBIDF_RNG_HPP
