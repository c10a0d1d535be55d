#pragma once

#include <array>
#include <cstdint>

namespace latentad {

/// Philox4x32-10 block function (Salmon et al., SC'11): maps a 128-bit
/// counter and a 64-bit key to 128 pseudo-random bits.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// A stream addressed by (seed, a, b, c): the seed is the key, the three
/// coordinates fix the upper counter words and the lower word counts blocks.
/// Two streams with different coordinates never share a block, and a
/// stream's output does not depend on which thread draws it.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint32_t a, std::uint32_t b, std::uint32_t c);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard normal by inverse-CDF transform of uniform().
  double normal();

 private:
  std::array<std::uint32_t, 2> key_;
  std::array<std::uint32_t, 4> counter_;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace latentad
