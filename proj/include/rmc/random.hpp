// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <vector>
#include <span>

#include "rmc/box.hpp"

namespace rmc {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// The splitmix64 finaliser.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// splitmix64 generator. The state is the seed plus k golden-ratio
/// increments after k draws; nothing else is mutable.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  constexpr explicit RandomStream(std::uint64_t seed = 0) noexcept
      : state_(seed) {}

  constexpr std::uint64_t next_u64() noexcept {
    state_ += kGoldenGamma;
    return splitmix64_mix(state_);
  }

  /// Uniform on [0, 1): top 53 bits scaled by 2^-53.
  constexpr double uniform01() noexcept { return to_unit(next_u64()); }

  static constexpr double to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

  // UniformRandomBitGenerator interface
  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }
  constexpr std::uint64_t operator()() noexcept { return next_u64(); }

  friend constexpr bool operator==(const RandomStream&,
                                   const RandomStream&) = default;

 private:
  std::uint64_t state_;
};

constexpr RandomStream make_stream(std::uint64_t seed) noexcept {
  return RandomStream(seed);
}

/// Independent stream for parallel chunk `chunk` of a run seeded with `seed`.
constexpr RandomStream substream(std::uint64_t seed, std::uint64_t chunk) noexcept {
  return RandomStream(splitmix64_mix(seed ^ (kGoldenGamma * (chunk + 1))));
}

/// lower + u * width, kept strictly below `upper` when rounding would reach it.
inline double affine_unit(double u, double lower, double width,
                          double upper) noexcept {
  const double x = lower + u * width;
  return x < upper ? x : std::nextafter(upper, lower);
}

/// Writes a uniform point of `box` into `out`, consuming exactly
/// box.dims() draws in dimension order.
inline void uniform_box(RandomStream& stream, const Box& box,
                        std::span<double> out) noexcept {
  const auto& b = box.bounds();
  for (std::size_t i = 0; i < b.size(); ++i)
    out[i] = affine_unit(stream.uniform01(), b[i].lower, b[i].upper - b[i].lower,
                         b[i].upper);
}

inline std::vector<double> uniform_box(RandomStream& stream, const Box& box) {
  std::vector<double> p(box.dims());
  uniform_box(stream, box, p);
  return p;
}

}  // namespace rmc
