#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "core/dyadic.hpp"

namespace nlbox {

// One choice of observable per party, packed as a bitmask: bit i is party i
// (0-based), 0 = observable "x", 1 = observable "y". Serialized form is a
// string over {x,y} with party i at character i, e.g. "xyx" = mask 0b010.
using SettingMask = std::uint32_t;

std::string setting_to_string(SettingMask s, int n);
SettingMask setting_from_string(const std::string& text);

inline constexpr int kPartyCap = 16;

// Signed dyadic-rational coefficients over the 2^n settings of n parties.
// Zero coefficients are never stored.
struct BellExpression {
  int n = 0;
  std::map<SettingMask, Dyadic> terms;

  // Accumulates into the coefficient at s, dropping exact zeros.
  void add_term(SettingMask s, const Dyadic& c);
  const Dyadic* coefficient(SettingMask s) const;

  std::size_t term_count() const { return terms.size(); }

  friend bool operator==(const BellExpression& a, const BellExpression& b) {
    return a.n == b.n && a.terms == b.terms;
  }
};

// Correlation value per setting, each in [-1, +1] when it comes from a
// physical behavior. evaluate() treats it as a plain vector.
using CorrelationAssignment = std::map<SettingMask, double>;

// Klyshko expression A_n: A_2 = xx + xy + yx - yy, and each further party is
// tensored on as A_k = (A_{k-1}(x+y) + A'_{k-1}(x-y)) / 2. Coefficients are
// exact; cancellations are carried out. 2 <= n <= cap.
BellExpression klyshko(int n, int cap = kPartyCap);

// Same expression with all "x" and "y" exchanged (bitwise complement of every
// setting). Involution.
BellExpression prime(const BellExpression& e);

// Svetlichny expression S_n: A_n for even n; (A_n -/+ A'_n)/2 for odd n with
// the minus sign when n = 3 (mod 4) and the plus sign when n = 1 (mod 4).
// Always 2^n terms of equal magnitude.
BellExpression svetlichny(int n, int cap = kPartyCap);

struct UnitForm {
  BellExpression unit;  // all coefficients +/-1
  Dyadic scale;         // scale * unit == input
};

// Rescales an equal-magnitude expression so every coefficient is +/-1.
// Throws unequal_magnitudes otherwise.
UnitForm unit_form(const BellExpression& e);

// Sum of |coefficients|, the algebraic (no-signaling-unconstrained) maximum.
Dyadic algebraic_max(const BellExpression& e);

// Linear functional sum_s coeff(s) * c(s); throws missing_setting when c does
// not cover a setting of e.
double evaluate(const BellExpression& e, const CorrelationAssignment& c);

BellExpression scale_expression(const BellExpression& e, const Dyadic& factor);

// JSON interchange: {"n": int, "terms": [{"setting": "xyx...", "num": int,
// "exp": int}]} with terms sorted lexicographically by setting string.
// indent < 0 emits compact JSON. Unknown keys are ignored on input.
std::string expression_to_json(const BellExpression& e, int indent = -1);
BellExpression expression_from_json(const std::string& json);

}  // namespace nlbox
