#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "core/errors.hpp"

namespace nlbox {

// Exact dyadic rational num / 2^exp with exp >= 0.
// Canonical form: num odd whenever exp > 0; zero is stored as (0, 0).
struct Dyadic {
  std::int64_t num = 0;
  std::uint32_t exp = 0;

  Dyadic() = default;
  Dyadic(std::int64_t n) : num(n), exp(0) {}
  Dyadic(std::int64_t n, std::uint32_t e) : num(n), exp(e) { normalize(); }

  static Dyadic half() { return Dyadic(1, 1); }

  void normalize() {
    if (num == 0) {
      exp = 0;
      return;
    }
    while (exp > 0 && (num & 1) == 0) {
      num >>= 1;
      --exp;
    }
  }

  bool is_zero() const { return num == 0; }
  int sign() const { return num > 0 ? 1 : (num < 0 ? -1 : 0); }

  Dyadic abs() const { return num < 0 ? Dyadic(-num, exp) : *this; }

  std::int64_t den() const {
    if (exp >= 63) fail(errc::arithmetic_overflow, "dyadic denominator does not fit int64");
    return std::int64_t{1} << exp;
  }

  double to_double() const { return std::ldexp(static_cast<double>(num), -static_cast<int>(exp)); }

  std::string to_string() const {
    if (exp == 0) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den());
  }

  friend Dyadic operator-(const Dyadic& a) { return Dyadic(-a.num, a.exp); }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    const std::uint32_t e = a.exp > b.exp ? a.exp : b.exp;
    return Dyadic(shifted(a.num, e - a.exp) + shifted(b.num, e - b.exp), e);
  }

  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    const __int128 p = static_cast<__int128>(a.num) * b.num;
    if (p > INT64_MAX || p < INT64_MIN) fail(errc::arithmetic_overflow, "dyadic multiply overflow");
    return Dyadic(static_cast<std::int64_t>(p), a.exp + b.exp);
  }

  // Exact comparison via cross multiplication on a common exponent.
  friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.num == b.num && a.exp == b.exp; }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
  friend bool operator<(const Dyadic& a, const Dyadic& b) {
    const std::uint32_t e = a.exp > b.exp ? a.exp : b.exp;
    return shifted(a.num, e - a.exp) < shifted(b.num, e - b.exp);
  }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return a < b || a == b; }
  friend bool operator>(const Dyadic& a, const Dyadic& b) { return b < a; }
  friend bool operator>=(const Dyadic& a, const Dyadic& b) { return b <= a; }

 private:
  static std::int64_t shifted(std::int64_t v, std::uint32_t by) {
    if (v == 0) return 0;
    if (by >= 63) fail(errc::arithmetic_overflow, "dyadic shift overflow");
    const __int128 r = static_cast<__int128>(v) << by;
    if (r > INT64_MAX || r < INT64_MIN) fail(errc::arithmetic_overflow, "dyadic shift overflow");
    return static_cast<std::int64_t>(r);
  }
};

// Power of two as a dyadic, 2^k for k >= 0.
inline Dyadic dyadic_pow2(unsigned k) {
  if (k >= 62) fail(errc::arithmetic_overflow, "2^k does not fit int64");
  return Dyadic(std::int64_t{1} << k);
}

}  // namespace nlbox
