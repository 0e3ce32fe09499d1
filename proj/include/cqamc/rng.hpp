#pragma once

#include <cstdint>
#include <random>

namespace cqamc {

using Rng = std::mt19937_64;

/// Independent, reproducible substream `stream` of a base seed.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream = 0) {
  // splitmix64 finalizer decorrelates neighbouring (seed, stream) pairs.
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  const std::uint64_t a = mix(seed);
  const std::uint64_t b = mix(a ^ mix(stream + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

/// Uniform in the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  // 53 random bits, offset by half an ulp so neither endpoint is hit.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace cqamc
