#pragma once

#include <cstddef>
#include <cstdint>

namespace fclloop {

/// SplitMix64 generator. The state transition and output mixing are fixed so
/// that a seed produces the same stream on every platform and in every
/// language that re-implements it:
///
///   state  <- state + 0x9E3779B97F4A7C15
///   z      <- state
///   z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB
///   output <- z ^ (z >> 31)
///
/// uniform() takes the top 53 bits of one output scaled by 2^-53.
/// below(n) is floor(output * n / 2^64) using a 128-bit product.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) {
    const unsigned __int128 product = static_cast<unsigned __int128>(next()) * n;
    return static_cast<std::size_t>(product >> 64);
  }

  [[nodiscard]] std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace fclloop
