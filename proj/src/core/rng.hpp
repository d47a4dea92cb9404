#pragma once

#include <cstdint>

namespace nlbox {

// Counter-based deterministic generator. Each draw is a SplitMix64-style
// finalizer applied to the (seed, stream, counter) triple, so the sequence is
// bit-exact on every platform and any (seed, stream) pair yields an
// independent stream. Parallel work uses disjoint stream indices.
//
// next_u64(): z = mix(seed*C0 + counter) XOR mix(stream*C1 + C2), mixed once
// more, with mix the SplitMix64 finalizer. The exact constants are part of
// the reproducibility contract and are documented in the README.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::uint64_t counter = 0;

  RngStream() = default;
  RngStream(std::uint64_t seed_, std::uint64_t stream_) : seed(seed_), stream(stream_) {}

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t next_u64() {
    const std::uint64_t a = mix(seed * 0x9e3779b97f4a7c15ull + counter);
    const std::uint64_t b = mix(stream * 0xd1342543de82ef95ull + 0x632be59bd9b4e019ull);
    ++counter;
    return mix(a ^ b);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  int next_bit() { return static_cast<int>(next_u64() >> 63); }

  // Uniform in [0, bound) via fixed-point multiply; bound >= 1.
  std::uint32_t next_below(std::uint32_t bound) {
    return static_cast<std::uint32_t>((static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }
};

}  // namespace nlbox
