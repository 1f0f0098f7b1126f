#pragma once

#include <cstdint>
#include <limits>

namespace ldsignal {

struct Seed {
  std::uint64_t value = 0;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

// Counter-based split: a child seed depends only on (parent, stream id).
Seed derive_seed(Seed parent, std::uint64_t stream);

// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(Seed seed) : state_(seed.value) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return splitmix64_mix(state_);
  }

 private:
  std::uint64_t state_;
};

}  // namespace ldsignal
