#include "ldsignal/rng.hpp"

namespace ldsignal {

std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Seed derive_seed(Seed parent, std::uint64_t stream) {
  std::uint64_t a = splitmix64_mix(parent.value + 0x9E3779B97F4A7C15ULL);
  std::uint64_t b = splitmix64_mix(stream ^ 0xD1B54A32D192ED03ULL);
  return Seed{splitmix64_mix(a ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2)))};
}

}  // namespace ldsignal
