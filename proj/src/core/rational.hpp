#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "core/dyadic.hpp"
#include "core/errors.hpp"

namespace nlbox {

// Exact rational with int64 numerator/denominator, always reduced, den > 0.
// Used for probability tables; denominators stay small (2^n times the noise
// denominator), so int64 with __int128 intermediates is plenty.
struct Rat64 {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rat64() = default;
  Rat64(std::int64_t n) : num(n), den(1) {}
  Rat64(std::int64_t n, std::int64_t d) : num(n), den(d) { reduce(); }
  explicit Rat64(const Dyadic& d) : num(d.num), den(d.den()) {}

  void reduce() {
    if (den == 0) fail(errc::invalid_argument, "rational with zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (num == 0) {
      den = 1;
      return;
    }
    const std::uint64_t mag = num < 0 ? ~static_cast<std::uint64_t>(num) + 1 : static_cast<std::uint64_t>(num);
    const std::uint64_t g = std::gcd(mag, static_cast<std::uint64_t>(den));
    num /= static_cast<std::int64_t>(g);
    den /= static_cast<std::int64_t>(g);
  }

  bool is_zero() const { return num == 0; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }

  static Rat64 from_cross(__int128 n, __int128 d) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    // Reduce in 128 bits before narrowing.
    __int128 a = n < 0 ? -n : n;
    __int128 b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a != 0) {
      n /= a;
      d /= a;
    }
    if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX) fail(errc::arithmetic_overflow, "rational overflow");
    Rat64 r;
    r.num = static_cast<std::int64_t>(n);
    r.den = static_cast<std::int64_t>(d == 0 ? 1 : d);
    return r;
  }

  friend Rat64 operator-(const Rat64& a) {
    Rat64 r;
    r.num = -a.num;
    r.den = a.den;
    return r;
  }
  friend Rat64 operator+(const Rat64& a, const Rat64& b) {
    return from_cross(static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den,
                      static_cast<__int128>(a.den) * b.den);
  }
  friend Rat64 operator-(const Rat64& a, const Rat64& b) { return a + (-b); }
  friend Rat64 operator*(const Rat64& a, const Rat64& b) {
    return from_cross(static_cast<__int128>(a.num) * b.num, static_cast<__int128>(a.den) * b.den);
  }
  friend Rat64 operator/(const Rat64& a, const Rat64& b) {
    if (b.num == 0) fail(errc::invalid_argument, "rational division by zero");
    return from_cross(static_cast<__int128>(a.num) * b.den, static_cast<__int128>(a.den) * b.num);
  }

  friend bool operator==(const Rat64& a, const Rat64& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator!=(const Rat64& a, const Rat64& b) { return !(a == b); }
  friend bool operator<(const Rat64& a, const Rat64& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend bool operator<=(const Rat64& a, const Rat64& b) { return !(b < a); }
  friend bool operator>(const Rat64& a, const Rat64& b) { return b < a; }
  friend bool operator>=(const Rat64& a, const Rat64& b) { return !(a < b); }
};

// Exact parse of a non-negative decimal literal such as "0.95" or "1".
// Fractional part limited to 18 digits so the denominator fits int64.
Rat64 rat_from_decimal(const std::string& text);

}  // namespace nlbox
