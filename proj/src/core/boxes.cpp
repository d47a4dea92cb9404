#include "core/boxes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <json.hpp>

#include "core/errors.hpp"

namespace nlbox {

BoxPolynomial svetlichny_box(int n, int cap) {
  if (n < 2) fail(errc::invalid_argument, "party count must be at least 2");
  if (cap > kPartyCap) cap = kPartyCap;
  if (n > cap) fail(errc::too_large, "party count exceeds cap " + std::to_string(cap));
  BoxPolynomial p;
  p.n = n;
  p.target.resize(std::size_t{1} << n);
  for (InputMask z = 0; z < p.target.size(); ++z) {
    std::uint8_t g = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) g ^= ((z >> i) & (z >> j)) & 1u;
    p.target[z] = g;
  }
  return p;
}

BellExpression box_to_bell(const BoxPolynomial& p, BoxMapping m) {
  const SettingMask all = (SettingMask{1} << p.n) - 1;
  BellExpression e;
  e.n = p.n;
  for (SettingMask s = 0; s <= all; ++s) {
    const InputMask z = m.input_swap ? (s ^ all) : s;
    const int g = p.value(z);
    const int sign = (g ^ (m.output_swap ? 1 : 0)) ? -1 : 1;
    e.terms.emplace(s, Dyadic(sign));
  }
  return e;
}

std::optional<BoxMapping> find_mapping(const BoxPolynomial& p, const BellExpression& e) {
  for (const auto& [s, c] : e.terms)
    if (c.abs() != Dyadic(1)) fail(errc::non_unit_expression, "expression coefficients must be +/-1");
  if (e.n != p.n) return std::nullopt;
  for (int input_swap = 0; input_swap < 2; ++input_swap)
    for (int output_swap = 0; output_swap < 2; ++output_swap) {
      const BoxMapping m{input_swap != 0, output_swap != 0};
      if (box_to_bell(p, m) == e) return m;
    }
  return std::nullopt;
}

BoxBehavior canonical_distribution(const BellExpression& unit) {
  const std::size_t rows = std::size_t{1} << unit.n;
  if (unit.term_count() != rows) fail(errc::non_unit_expression, "expression must cover all settings");
  BoxBehavior b;
  b.n = unit.n;
  b.exact = true;
  b.label = "perfect";
  b.rows_exact.assign(rows, std::vector<Rat64>(rows));
  for (InputMask z = 0; z < rows; ++z) {
    const Dyadic* c = unit.coefficient(z);
    if (c == nullptr || c->abs() != Dyadic(1)) fail(errc::non_unit_expression, "coefficients must be +/-1");
    const int sign = c->sign();
    for (OutputMask o = 0; o < rows; ++o) {
      const int parity = std::popcount(o) & 1 ? -1 : 1;
      // (1 + sign*parity)/2^n is either 0 or 2^(1-n).
      b.rows_exact[z][o] = Rat64(1 + sign * parity, static_cast<std::int64_t>(rows));
    }
  }
  return b;
}

BoxBehavior perfect_box(const BoxPolynomial& p) { return canonical_distribution(box_to_bell(p, BoxMapping{})); }

BoxBehavior noisy_box(const BoxPolynomial& p, const Rat64& prob) {
  if (prob < Rat64(1, 2) || prob > Rat64(1)) fail(errc::out_of_range, "noise parameter must be in [1/2, 1]");
  BoxBehavior b = perfect_box(p);
  const std::size_t rows = b.size();
  const OutputMask flip = OutputMask{1} << (p.n - 1);
  const Rat64 q = Rat64(1) - prob;
  b.label = "noisy(" + prob.to_string() + ")";
  for (InputMask z = 0; z < rows; ++z) {
    std::vector<Rat64> mixed(rows);
    for (OutputMask o = 0; o < rows; ++o)
      mixed[o] = prob * b.rows_exact[z][o] + q * b.rows_exact[z][o ^ flip];
    b.rows_exact[z] = std::move(mixed);
  }
  return b;
}

BoxBehavior lhv_strategy_box(const DeterministicStrategy& strategy) {
  const int n = strategy.n();
  if (n < 1) fail(errc::invalid_argument, "strategy must cover at least one party");
  const std::size_t rows = std::size_t{1} << n;
  BoxBehavior b;
  b.n = n;
  b.exact = true;
  b.label = "lhv(" + std::to_string(strategy.to_bits()) + ")";
  b.rows_exact.assign(rows, std::vector<Rat64>(rows, Rat64(0)));
  for (InputMask z = 0; z < rows; ++z) {
    OutputMask o = 0;
    for (int i = 0; i < n; ++i) {
      const int sign = strategy.sign(i, (z >> i) & 1);
      if (sign < 0) o |= OutputMask{1} << i;  // -1 outcome encodes as bit 1
    }
    b.rows_exact[z][o] = Rat64(1);
  }
  return b;
}

BoxBehavior ghz_box(const GhzStrategy& angles) {
  const int n = angles.n();
  if (n < 1) fail(errc::invalid_argument, "need at least one party");
  const std::size_t rows = std::size_t{1} << n;
  BoxBehavior b;
  b.n = n;
  b.exact = false;
  b.label = "ghz";
  b.rows_real.assign(rows, std::vector<double>(rows));
  const double norm = 1.0 / static_cast<double>(rows);
  for (InputMask z = 0; z < rows; ++z) {
    double phase = 0.0;
    for (int i = 0; i < n; ++i) phase += angles.angle(i, (z >> i) & 1);
    const double c = std::cos(phase);
    for (OutputMask o = 0; o < rows; ++o) {
      const double parity = std::popcount(o) & 1 ? -1.0 : 1.0;
      b.rows_real[z][o] = (1.0 + parity * c) * norm;
    }
  }
  return b;
}

namespace {

// Marginal of row z on the output bits of subset K, in pext order.
template <class T>
std::vector<T> marginal_on(const BoxBehavior& b, InputMask z, std::uint32_t subset) {
  const std::size_t rows = b.size();
  const int k = std::popcount(subset);
  std::vector<T> acc(std::size_t{1} << k, T(0));
  for (OutputMask o = 0; o < rows; ++o) {
    std::uint32_t packed = 0;
    int pos = 0;
    for (int i = 0; i < b.n; ++i) {
      if (!(subset & (1u << i))) continue;
      if (o & (1u << i)) packed |= 1u << pos;
      ++pos;
    }
    if constexpr (std::is_same_v<T, Rat64>)
      acc[packed] = acc[packed] + b.prob_exact(z, o);
    else
      acc[packed] += b.rows_real[z][o];
  }
  return acc;
}

template <class T>
void check_marginals(const BoxBehavior& b, double tol, NonsignalingReport& report) {
  const std::size_t rows = b.size();
  const std::uint32_t all = static_cast<std::uint32_t>(rows - 1);
  for (std::uint32_t subset = 1; subset < all; ++subset) {
    ++report.subsets_checked;
    // Group inputs by their restriction to K; marginals must agree in group.
    for (InputMask base = 0; base < rows; ++base) {
      if ((base & ~subset) != 0) continue;  // enumerate K-inputs once
      bool have_ref = false;
      std::vector<T> ref;
      InputMask ref_input = 0;
      for (InputMask rest = 0; rest < rows; ++rest) {
        if ((rest & subset) != 0) continue;
        const InputMask z = base | rest;
        std::vector<T> m = marginal_on<T>(b, z, subset);
        if (!have_ref) {
          ref = std::move(m);
          ref_input = z;
          have_ref = true;
          continue;
        }
        double dev = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
          double d;
          if constexpr (std::is_same_v<T, Rat64>)
            d = (m[i] - ref[i]).to_double();
          else
            d = m[i] - ref[i];
          dev = std::max(dev, std::abs(d));
        }
        const bool bad = std::is_same_v<T, Rat64> ? dev != 0.0 : dev > tol;
        if (bad) {
          report.pass = false;
          report.violations.push_back({"marginal", subset, ref_input, z, dev});
        }
      }
    }
  }
}

}  // namespace

NonsignalingReport verify_nonsignaling(const BoxBehavior& b, double tol) {
  NonsignalingReport report;
  const std::size_t rows = b.size();
  for (InputMask z = 0; z < rows; ++z) {
    if (b.exact) {
      Rat64 sum(0);
      for (OutputMask o = 0; o < rows; ++o) {
        if (b.prob_exact(z, o) < Rat64(0)) {
          report.pass = false;
          report.violations.push_back({"row_sum", 0, z, z, b.prob(z, o)});
        }
        sum = sum + b.prob_exact(z, o);
      }
      if (sum != Rat64(1)) {
        report.pass = false;
        report.violations.push_back({"row_sum", 0, z, z, (sum - Rat64(1)).to_double()});
      }
    } else {
      double sum = 0.0;
      for (OutputMask o = 0; o < rows; ++o) {
        if (b.rows_real[z][o] < -tol) {
          report.pass = false;
          report.violations.push_back({"row_sum", 0, z, z, b.rows_real[z][o]});
        }
        sum += b.rows_real[z][o];
      }
      if (std::abs(sum - 1.0) > tol) {
        report.pass = false;
        report.violations.push_back({"row_sum", 0, z, z, sum - 1.0});
      }
    }
  }
  if (b.n >= 2) {
    if (b.exact)
      check_marginals<Rat64>(b, tol, report);
    else
      check_marginals<double>(b, tol, report);
  }
  return report;
}

Rat64 success_probability_exact(const BoxBehavior& b, const BoxPolynomial& p) {
  if (!b.exact) fail(errc::invalid_argument, "behavior has no exact table");
  if (b.n != p.n) fail(errc::dimension_mismatch, "behavior and polynomial party counts differ");
  const std::size_t rows = b.size();
  Rat64 acc(0);
  for (InputMask z = 0; z < rows; ++z)
    for (OutputMask o = 0; o < rows; ++o)
      if ((std::popcount(o) & 1) == p.value(z)) acc = acc + b.prob_exact(z, o);
  return acc / Rat64(static_cast<std::int64_t>(rows));
}

double success_probability(const BoxBehavior& b, const BoxPolynomial& p) {
  if (b.exact) return success_probability_exact(b, p).to_double();
  if (b.n != p.n) fail(errc::dimension_mismatch, "behavior and polynomial party counts differ");
  const std::size_t rows = b.size();
  double acc = 0.0;
  for (InputMask z = 0; z < rows; ++z)
    for (OutputMask o = 0; o < rows; ++o)
      if ((std::popcount(o) & 1) == p.value(z)) acc += b.rows_real[z][o];
  return acc / static_cast<double>(rows);
}

CorrelationAssignment correlations_of(const BoxBehavior& b) {
  CorrelationAssignment c;
  const std::size_t rows = b.size();
  for (InputMask z = 0; z < rows; ++z) {
    double e = 0.0;
    for (OutputMask o = 0; o < rows; ++o) e += (std::popcount(o) & 1 ? -1.0 : 1.0) * b.prob(z, o);
    c[z] = e;
  }
  return c;
}

OutputMask sample(const BoxBehavior& b, InputMask inputs, RngStream& rng) {
  const std::size_t rows = b.size();
  if (inputs >= rows) fail(errc::out_of_range, "input mask out of range");
  const double u = rng.next_double();
  double cum = 0.0;
  for (OutputMask o = 0; o < rows; ++o) {
    cum += b.prob(inputs, o);
    if (u < cum) return o;
  }
  return static_cast<OutputMask>(rows - 1);  // guard against rounding at u ~ 1
}

std::string box_to_json(const BoxBehavior& b, int indent) {
  nlohmann::ordered_json j;
  j["n"] = b.n;
  j["label"] = b.label;
  j["rows"] = nlohmann::ordered_json::array();
  const std::size_t rows = b.size();
  // Input bitstrings with party 0 at character 0 sort like the reversed mask;
  // emit in that lexicographic order.
  std::vector<std::string> names(rows);
  std::vector<InputMask> order(rows);
  for (InputMask z = 0; z < rows; ++z) {
    std::string s(static_cast<std::size_t>(b.n), '0');
    for (int i = 0; i < b.n; ++i)
      if (z & (1u << i)) s[static_cast<std::size_t>(i)] = '1';
    names[z] = std::move(s);
    order[z] = z;
  }
  std::sort(order.begin(), order.end(), [&](InputMask a, InputMask c) { return names[a] < names[c]; });
  for (const InputMask z : order) {
    nlohmann::ordered_json row;
    row["input"] = names[z];
    auto probs = nlohmann::ordered_json::array();
    for (OutputMask o = 0; o < rows; ++o) {
      if (b.exact)
        probs.push_back(b.prob_exact(z, o).to_string());
      else
        probs.push_back(b.rows_real[z][o]);
    }
    row["probs"] = std::move(probs);
    j["rows"].push_back(std::move(row));
  }
  return indent < 0 ? j.dump() : j.dump(indent);
}

static Rat64 rat_from_fraction_string(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) fail(errc::invalid_argument, "expected \"num/den\" string");
  return Rat64(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
}

BoxBehavior box_from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(errc::invalid_argument, std::string("bad box JSON: ") + ex.what());
  }
  BoxBehavior b;
  b.n = j.at("n").get<int>();
  if (b.n < 1 || b.n > kPartyCap) fail(errc::invalid_argument, "party count out of range");
  b.label = j.value("label", "");
  const std::size_t rows = b.size();
  const auto& jrows = j.at("rows");
  if (jrows.size() != rows) fail(errc::invalid_argument, "wrong row count");
  // Probe the first probability entry to pick the exact/real representation.
  b.exact = jrows.at(0).at("probs").at(0).is_string();
  if (b.exact)
    b.rows_exact.assign(rows, std::vector<Rat64>(rows));
  else
    b.rows_real.assign(rows, std::vector<double>(rows));
  for (const auto& row : jrows) {
    const std::string input = row.at("input").get<std::string>();
    if (static_cast<int>(input.size()) != b.n) fail(errc::invalid_argument, "input bitstring length mismatch");
    InputMask z = 0;
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (input[i] == '1')
        z |= InputMask{1} << i;
      else if (input[i] != '0')
        fail(errc::invalid_argument, "input bitstring must be over {0,1}");
    }
    const auto& probs = row.at("probs");
    if (probs.size() != rows) fail(errc::invalid_argument, "wrong probability count");
    for (OutputMask o = 0; o < rows; ++o) {
      if (b.exact)
        b.rows_exact[z][o] = rat_from_fraction_string(probs.at(o).get<std::string>());
      else
        b.rows_real[z][o] = probs.at(o).get<double>();
    }
  }
  return b;
}

Rat64 rat_from_decimal(const std::string& text) {
  if (text.empty()) fail(errc::invalid_argument, "empty decimal literal");
  const auto dot = text.find('.');
  const std::string whole = dot == std::string::npos ? text : text.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : text.substr(dot + 1);
  if (frac.size() > 18) fail(errc::invalid_argument, "too many fractional digits");
  for (const char ch : whole + frac)
    if (ch < '0' || ch > '9') fail(errc::invalid_argument, "bad decimal literal: " + text);
  std::int64_t den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  const std::int64_t w = whole.empty() ? 0 : std::stoll(whole);
  const std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
  return Rat64(w * den + f, den);
}

}  // namespace nlbox
