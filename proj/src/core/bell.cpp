#include "core/bell.hpp"

#include <algorithm>
#include <vector>

#include <json.hpp>

#include "core/errors.hpp"

namespace nlbox {

std::string setting_to_string(SettingMask s, int n) {
  std::string out(static_cast<std::size_t>(n), 'x');
  for (int i = 0; i < n; ++i)
    if (s & (SettingMask{1} << i)) out[static_cast<std::size_t>(i)] = 'y';
  return out;
}

SettingMask setting_from_string(const std::string& text) {
  if (text.empty() || text.size() > kPartyCap) fail(errc::invalid_argument, "bad setting string length");
  SettingMask s = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == 'y')
      s |= SettingMask{1} << i;
    else if (text[i] != 'x')
      fail(errc::invalid_argument, "setting string must be over {x,y}");
  }
  return s;
}

void BellExpression::add_term(SettingMask s, const Dyadic& c) {
  if (c.is_zero()) return;
  auto it = terms.find(s);
  if (it == terms.end()) {
    terms.emplace(s, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) terms.erase(it);
}

const Dyadic* BellExpression::coefficient(SettingMask s) const {
  auto it = terms.find(s);
  return it == terms.end() ? nullptr : &it->second;
}

static void check_party_count(int n, int cap) {
  if (n < 2) fail(errc::invalid_argument, "party count must be at least 2");
  if (cap > kPartyCap) cap = kPartyCap;
  if (n > cap) fail(errc::too_large, "party count exceeds cap " + std::to_string(cap));
}

BellExpression klyshko(int n, int cap) {
  check_party_count(n, cap);
  BellExpression a;
  a.n = 2;
  a.add_term(0b00, Dyadic(1));   // xx
  a.add_term(0b10, Dyadic(1));   // xy
  a.add_term(0b01, Dyadic(1));   // yx
  a.add_term(0b11, Dyadic(-1));  // yy
  const Dyadic half = Dyadic::half();
  for (int k = 3; k <= n; ++k) {
    const BellExpression ap = prime(a);
    const SettingMask hi = SettingMask{1} << (k - 1);
    BellExpression next;
    next.n = k;
    for (const auto& [s, c] : a.terms) {
      const Dyadic hc = c * half;
      next.add_term(s, hc);       // party k measures x
      next.add_term(s | hi, hc);  // party k measures y
    }
    for (const auto& [s, c] : ap.terms) {
      const Dyadic hc = c * half;
      next.add_term(s, hc);
      next.add_term(s | hi, -hc);
    }
    a = std::move(next);
  }
  return a;
}

BellExpression prime(const BellExpression& e) {
  const SettingMask all = (SettingMask{1} << e.n) - 1;
  BellExpression out;
  out.n = e.n;
  for (const auto& [s, c] : e.terms) out.terms.emplace(s ^ all, c);
  return out;
}

BellExpression svetlichny(int n, int cap) {
  check_party_count(n, cap);
  BellExpression a = klyshko(n, cap);
  if (n % 2 == 0) return a;
  const BellExpression ap = prime(a);
  const Dyadic half = Dyadic::half();
  const bool minus = (n % 4) == 3;
  BellExpression out;
  out.n = n;
  for (const auto& [s, c] : a.terms) out.add_term(s, c * half);
  for (const auto& [s, c] : ap.terms) out.add_term(s, minus ? -(c * half) : c * half);
  return out;
}

UnitForm unit_form(const BellExpression& e) {
  UnitForm r;
  r.unit.n = e.n;
  r.scale = Dyadic(1);
  if (e.terms.empty()) return r;
  const Dyadic mag = e.terms.begin()->second.abs();
  for (const auto& [s, c] : e.terms) {
    if (c.abs() != mag) fail(errc::unequal_magnitudes, "coefficients differ in magnitude");
    r.unit.terms.emplace(s, Dyadic(c.sign()));
  }
  r.scale = mag;
  return r;
}

Dyadic algebraic_max(const BellExpression& e) {
  Dyadic sum(0);
  for (const auto& [s, c] : e.terms) sum = sum + c.abs();
  return sum;
}

double evaluate(const BellExpression& e, const CorrelationAssignment& c) {
  double acc = 0.0;
  for (const auto& [s, coeff] : e.terms) {
    auto it = c.find(s);
    if (it == c.end())
      fail(errc::missing_setting, "no correlation value for setting " + setting_to_string(s, e.n));
    acc += coeff.to_double() * it->second;
  }
  return acc;
}

BellExpression scale_expression(const BellExpression& e, const Dyadic& factor) {
  BellExpression out;
  out.n = e.n;
  for (const auto& [s, c] : e.terms) out.add_term(s, c * factor);
  return out;
}

std::string expression_to_json(const BellExpression& e, int indent) {
  std::vector<std::pair<std::string, const Dyadic*>> rows;
  rows.reserve(e.terms.size());
  for (const auto& [s, c] : e.terms) rows.emplace_back(setting_to_string(s, e.n), &c);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  nlohmann::ordered_json j;
  j["n"] = e.n;
  j["terms"] = nlohmann::ordered_json::array();
  for (const auto& [name, c] : rows) {
    nlohmann::ordered_json t;
    t["setting"] = name;
    t["num"] = c->num;
    t["exp"] = c->exp;
    j["terms"].push_back(std::move(t));
  }
  return indent < 0 ? j.dump() : j.dump(indent);
}

BellExpression expression_from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(errc::invalid_argument, std::string("bad expression JSON: ") + ex.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("terms"))
    fail(errc::invalid_argument, "expression JSON needs \"n\" and \"terms\"");
  BellExpression e;
  e.n = j.at("n").get<int>();
  if (e.n < 1 || e.n > kPartyCap) fail(errc::invalid_argument, "party count out of range");
  for (const auto& t : j.at("terms")) {
    const std::string name = t.at("setting").get<std::string>();
    if (static_cast<int>(name.size()) != e.n) fail(errc::invalid_argument, "setting length mismatch");
    const SettingMask s = setting_from_string(name);
    if (e.terms.count(s)) fail(errc::invalid_argument, "duplicate setting " + name);
    const Dyadic c(t.at("num").get<std::int64_t>(), t.at("exp").get<std::uint32_t>());
    if (!c.is_zero()) e.terms.emplace(s, c);
  }
  return e;
}

}  // namespace nlbox
