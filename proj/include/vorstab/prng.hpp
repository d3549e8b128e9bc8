#pragma once

#include <cstdint>

namespace vorstab {

// SplitMix64: the public-domain mixing generator. Chosen over the standard
// library engines because its output is specified bit for bit by three lines
// of arithmetic, so any port can reproduce a perturbation stream exactly from
// the seed alone. Draws map to doubles through the top 53 bits.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1): 53-bit mantissa, exactly representable.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform on [-1, 1).
  double symmetric() { return 2 * uniform() - 1; }
};

}  // namespace vorstab
