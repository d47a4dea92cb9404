#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "core/errors.hpp"

namespace nlbox {

// Local deterministic strategy: per party, predetermined +/-1 outcomes for
// observables x and y. Packed form is a 2n-bit integer: bit 2i is party i's
// x outcome (0 -> +1, 1 -> -1), bit 2i+1 the y outcome.
struct DeterministicStrategy {
  std::vector<std::array<int, 2>> signs;  // [party][observable] in {+1,-1}

  int n() const { return static_cast<int>(signs.size()); }

  int sign(int party, int observable) const { return signs[static_cast<std::size_t>(party)][observable]; }

  static DeterministicStrategy from_bits(std::uint32_t bits, int n) {
    DeterministicStrategy s;
    s.signs.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s.signs[static_cast<std::size_t>(i)][0] = (bits >> (2 * i)) & 1 ? -1 : 1;
      s.signs[static_cast<std::size_t>(i)][1] = (bits >> (2 * i + 1)) & 1 ? -1 : 1;
    }
    return s;
  }

  std::uint32_t to_bits() const {
    std::uint32_t bits = 0;
    for (int i = 0; i < n(); ++i) {
      if (signs[static_cast<std::size_t>(i)][0] < 0) bits |= std::uint32_t{1} << (2 * i);
      if (signs[static_cast<std::size_t>(i)][1] < 0) bits |= std::uint32_t{1} << (2 * i + 1);
    }
    return bits;
  }
};

// Equatorial measurement angles per party, one for each observable/input,
// stored in [0, 2*pi).
struct GhzStrategy {
  std::vector<std::array<double, 2>> angles;

  int n() const { return static_cast<int>(angles.size()); }

  double angle(int party, int observable) const { return angles[static_cast<std::size_t>(party)][observable]; }

  static double wrap(double a) {
    const double two_pi = 6.283185307179586476925286766559;
    a = std::fmod(a, two_pi);
    if (a < 0) a += two_pi;
    return a;
  }

  static GhzStrategy from_flat(const double* flat, int n) {
    GhzStrategy g;
    g.angles.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      g.angles[static_cast<std::size_t>(i)][0] = wrap(flat[2 * i]);
      g.angles[static_cast<std::size_t>(i)][1] = wrap(flat[2 * i + 1]);
    }
    return g;
  }
};

// Split of the parties into two non-empty blocks; canonical form keeps party
// 0 in block A.
struct Bipartition {
  int n = 0;
  std::uint32_t block_a = 0;

  Bipartition() = default;
  Bipartition(int n_, std::uint32_t a) : n(n_), block_a(a) {
    const std::uint32_t all = (std::uint32_t{1} << n_) - 1;
    if ((a & 1u) == 0 || a == 0 || a == all || (a & ~all) != 0)
      fail(errc::invalid_argument, "bipartition block must be proper, non-empty, and contain party 0");
  }

  std::uint32_t block_b() const { return ((std::uint32_t{1} << n) - 1) & ~block_a; }
};

}  // namespace nlbox
