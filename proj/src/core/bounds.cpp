#include "core/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace nlbox {

namespace {

std::vector<Dyadic> dense_coefficients(const BellExpression& e) {
  std::vector<Dyadic> c(std::size_t{1} << e.n, Dyadic(0));
  for (const auto& [s, coeff] : e.terms) c[s] = coeff;
  return c;
}

// Recursive exhaustive search over party sign pairs, highest party first so
// leaves are visited in increasing packed-strategy order (first max wins ties
// with the lowest strategy index). Folding party k's pair (ex, ey) reduces
// the table to c'(s) = ex*c(s,x) + ey*c(s,y).
void lhv_search(const std::vector<Dyadic>& coeffs, int k, std::uint32_t prefix_bits, Dyadic& best,
                std::uint32_t& best_bits, bool& have_best) {
  if (k == 0) {
    const Dyadic v = coeffs[0];
    if (!have_best || best < v) {
      best = v;
      best_bits = prefix_bits;
      have_best = true;
    }
    return;
  }
  const std::size_t half = std::size_t{1} << (k - 1);
  for (std::uint32_t pair = 0; pair < 4; ++pair) {
    const int ex = (pair & 1) ? -1 : 1;
    const int ey = (pair & 2) ? -1 : 1;
    std::vector<Dyadic> reduced(half);
    for (std::size_t s = 0; s < half; ++s) {
      const Dyadic cx = ex > 0 ? coeffs[s] : -coeffs[s];
      const Dyadic cy = ey > 0 ? coeffs[s | half] : -coeffs[s | half];
      reduced[s] = cx + cy;
    }
    lhv_search(reduced, k - 1, prefix_bits | (pair << (2 * (k - 1))), best, best_bits, have_best);
  }
}

}  // namespace

LhvResult lhv_max(const BellExpression& e, int max_n) {
  if (e.n < 1) fail(errc::invalid_argument, "expression has no parties");
  if (e.n > max_n || max_n > kPartyCap)
    fail(errc::too_large, "lhv_max enumeration capped at n = " + std::to_string(std::min(max_n, kPartyCap)));
  const std::vector<Dyadic> coeffs = dense_coefficients(e);
  Dyadic best;
  std::uint32_t best_bits = 0;
  bool have_best = false;
  lhv_search(coeffs, e.n, 0, best, best_bits, have_best);
  return {best, DeterministicStrategy::from_bits(best_bits, e.n)};
}

HybridResult hybrid_max(const BellExpression& e) {
  if (e.n < 2) fail(errc::invalid_argument, "need at least two parties");
  if (e.n > 7) fail(errc::too_large, "exact hybrid bound capped at n = 7");
  const std::vector<Dyadic> coeffs = dense_coefficients(e);
  const std::uint32_t all = (1u << e.n) - 1;

  Dyadic best;
  std::uint32_t best_block = 0;
  bool have_best = false;

  // Canonical enumeration: block A contains party 0, proper and non-empty.
  for (std::uint32_t a = 1; a < all; a += 2) {
    // Fold through the smaller side; the value is symmetric in (A, B).
    const std::uint32_t small = std::popcount(a) <= std::popcount(all & ~a) ? a : (all & ~a);
    const int k = std::popcount(small);
    const std::size_t small_settings = std::size_t{1} << k;
    const std::size_t big_settings = std::size_t{1} << (e.n - k);

    // pext tables: full setting -> (small-side index, big-side index).
    const std::size_t rows = std::size_t{1} << e.n;
    std::vector<std::uint32_t> idx_small(rows), idx_big(rows);
    for (std::uint32_t s = 0; s < rows; ++s) {
      std::uint32_t lo = 0, hi = 0;
      int lp = 0, hp = 0;
      for (int i = 0; i < e.n; ++i) {
        if (small & (1u << i)) {
          if (s & (1u << i)) lo |= 1u << lp;
          ++lp;
        } else {
          if (s & (1u << i)) hi |= 1u << hp;
          ++hp;
        }
      }
      idx_small[s] = lo;
      idx_big[s] = hi;
    }

    // Enumerate sign functions on the smaller side (at most 2^(2^3) = 256).
    const std::uint64_t functions = std::uint64_t{1} << small_settings;
    Dyadic block_best;
    bool block_have = false;
    for (std::uint64_t f = 0; f < functions; ++f) {
      std::vector<Dyadic> folded(big_settings, Dyadic(0));
      for (std::uint32_t s = 0; s < rows; ++s) {
        if (coeffs[s].is_zero()) continue;
        const bool neg = (f >> idx_small[s]) & 1;
        folded[idx_big[s]] = folded[idx_big[s]] + (neg ? -coeffs[s] : coeffs[s]);
      }
      Dyadic total(0);
      for (const Dyadic& v : folded) total = total + v.abs();
      if (!block_have || block_best < total) {
        block_best = total;
        block_have = true;
      }
    }
    if (!have_best || best < block_best) {
      best = block_best;
      best_block = a;
      have_best = true;
    }
  }
  return {best, Bipartition(e.n, best_block)};
}

namespace {

struct GhzObjective {
  int n;
  std::vector<std::uint32_t> masks;
  std::vector<double> coeffs;

  explicit GhzObjective(const BellExpression& e) : n(e.n) {
    masks.reserve(e.terms.size());
    coeffs.reserve(e.terms.size());
    for (const auto& [s, c] : e.terms) {
      masks.push_back(s);
      coeffs.push_back(c.to_double());
    }
  }

  // theta[2i + b] = party i's angle for observable b.
  double value(const std::vector<double>& theta) const {
    double v = 0.0;
    for (std::size_t t = 0; t < masks.size(); ++t) {
      double phase = 0.0;
      for (int i = 0; i < n; ++i) phase += theta[static_cast<std::size_t>(2 * i + ((masks[t] >> i) & 1))];
      v += coeffs[t] * std::cos(phase);
    }
    return v;
  }

  double value_and_grad(const std::vector<double>& theta, std::vector<double>& grad) const {
    double v = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t t = 0; t < masks.size(); ++t) {
      double phase = 0.0;
      for (int i = 0; i < n; ++i) phase += theta[static_cast<std::size_t>(2 * i + ((masks[t] >> i) & 1))];
      v += coeffs[t] * std::cos(phase);
      const double d = -coeffs[t] * std::sin(phase);
      for (int i = 0; i < n; ++i) grad[static_cast<std::size_t>(2 * i + ((masks[t] >> i) & 1))] += d;
    }
    return v;
  }
};

struct AscentOutcome {
  double value = -1e300;
  std::vector<double> theta;
  bool converged = false;
};

AscentOutcome ascend(const GhzObjective& obj, std::vector<double> theta, const GhzConfig& cfg) {
  const std::size_t dim = theta.size();
  std::vector<double> grad(dim), trial(dim);
  double v = obj.value_and_grad(theta, grad);
  bool converged = false;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    double gnorm2 = 0.0;
    for (const double g : grad) gnorm2 += g * g;
    if (std::sqrt(gnorm2) < cfg.grad_tol) {
      converged = true;
      break;
    }
    // Backtracking line search along the gradient (Armijo, c = 1e-4).
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t d = 0; d < dim; ++d) trial[d] = theta[d] + step * grad[d];
      const double tv = obj.value(trial);
      if (tv >= v + 1e-4 * step * gnorm2) {
        theta.swap(trial);
        v = obj.value_and_grad(theta, grad);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;  // step underflow: numerically at a stationary point
  }
  return {v, std::move(theta), converged};
}

}  // namespace

double ghz_value(const BellExpression& e, const std::vector<double>& theta) {
  return GhzObjective(e).value(theta);
}

double ghz_value_and_grad(const BellExpression& e, const std::vector<double>& theta,
                          std::vector<double>& grad) {
  grad.assign(static_cast<std::size_t>(2 * e.n), 0.0);
  return GhzObjective(e).value_and_grad(theta, grad);
}

GhzResult ghz_max(const BellExpression& e, const GhzConfig& config) {
  if (e.n < 1) fail(errc::invalid_argument, "expression has no parties");
  const GhzObjective obj(e);
  const std::size_t dim = static_cast<std::size_t>(2 * e.n);
  const int starts = std::max(1, config.multistarts);

  // Start 0 is all zeros; starts 1-2 are the equatorial ladder
  // theta_i^1 = theta_i^0 + pi/2 with the global phase left to polish; the
  // rest are uniform random angles from the seeded stream.
  const auto make_start = [&](int index) {
    std::vector<double> theta(dim, 0.0);
    if (index == 0) return theta;
    if (index <= 2) {
      const double base = index == 1 ? -0.78539816339744830962 : 2.35619449019234492885;
      theta[0] = base;
      for (int i = 0; i < e.n; ++i) theta[static_cast<std::size_t>(2 * i + 1)] = theta[static_cast<std::size_t>(2 * i)] + 1.57079632679489661923;
      return theta;
    }
    RngStream rng(config.seed, static_cast<std::uint64_t>(index));
    for (auto& t : theta) t = rng.next_double() * 6.283185307179586;
    return theta;
  };

  struct Best {
    double value = -1e300;
    int index = 0;
    std::vector<double> theta;
    bool converged = false;
  };
  const auto results = parallel_chunks<Best>(
      0, static_cast<std::uint64_t>(starts), config.threads,
      [&](std::size_t, std::uint64_t b, std::uint64_t eidx) {
        Best best;
        for (std::uint64_t s = b; s < eidx; ++s) {
          AscentOutcome out = ascend(obj, make_start(static_cast<int>(s)), config);
          if (out.value > best.value) {
            best = {out.value, static_cast<int>(s), std::move(out.theta), out.converged};
          }
        }
        return best;
      });
  Best overall;
  for (const Best& b : results) {
    if (b.theta.empty()) continue;
    if (b.value > overall.value || (b.value == overall.value && b.index < overall.index)) overall = b;
  }

  GhzResult r;
  r.value = overall.value;
  r.converged = overall.converged;
  r.strategy = GhzStrategy::from_flat(overall.theta.data(), e.n);
  return r;
}

double sim_probability(double v, double total_weight) {
  if (total_weight <= 0.0) fail(errc::invalid_argument, "total weight must be positive");
  if (std::abs(v) > total_weight * (1.0 + 1e-12)) fail(errc::out_of_range, "Bell value exceeds total weight");
  return std::clamp(0.5 * (1.0 + v / total_weight), 0.0, 1.0);
}

Rat64 sim_probability_exact(const Rat64& v, const Rat64& total_weight) {
  if (total_weight <= Rat64(0)) fail(errc::invalid_argument, "total weight must be positive");
  const Rat64 mag = v < Rat64(0) ? -v : v;
  if (total_weight < mag) fail(errc::out_of_range, "Bell value exceeds total weight");
  return Rat64(1, 2) * (Rat64(1) + v / total_weight);
}

BoundReport bound_report(int n, const GhzConfig& config) {
  const BellExpression e = svetlichny(n);
  BoundReport r;
  r.n = n;
  r.lhv = lhv_max(e);
  r.hybrid = hybrid_max(e);
  r.quantum = ghz_max(e, config);
  r.algebraic = algebraic_max(e);

  const Rat64 w(r.algebraic);
  r.p_lhv = sim_probability_exact(Rat64(r.lhv.value), w);
  r.p_hybrid = sim_probability_exact(Rat64(r.hybrid.value), w);
  r.p_quantum = sim_probability(r.quantum.value, w.to_double());
  r.p_algebraic = Rat64(1);

  const double slack = 1e-9;
  if (!(r.lhv.value <= r.hybrid.value) || r.quantum.value < r.hybrid.value.to_double() - slack ||
      r.quantum.value > r.algebraic.to_double() + slack)
    fail(errc::internal, "bound ordering violated");
  return r;
}

std::string bound_report_to_json(const BoundReport& r, int indent) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["expression"] = "svetlichny";
  j["lhv"] = {{"value", r.lhv.value.to_double()},
              {"value_exact", r.lhv.value.to_string()},
              {"strategy_bits", r.lhv.strategy.to_bits()}};
  std::vector<int> block;
  for (int i = 0; i < r.n; ++i)
    if (r.hybrid.partition.block_a & (1u << i)) block.push_back(i + 1);
  j["hybrid"] = {{"value", r.hybrid.value.to_double()},
                 {"value_exact", r.hybrid.value.to_string()},
                 {"block", block}};
  auto angles = nlohmann::ordered_json::array();
  for (const auto& a : r.quantum.strategy.angles) angles.push_back({a[0], a[1]});
  j["quantum"] = {{"value", r.quantum.value},
                  {"converged", r.quantum.converged},
                  {"note", "achieved (lower bound certificate)"},
                  {"angles", angles}};
  j["algebraic"] = {{"value", r.algebraic.to_double()}, {"value_exact", r.algebraic.to_string()}};
  j["simulation_probability"] = {{"lhv", r.p_lhv.to_double()},
                                 {"lhv_exact", r.p_lhv.to_string()},
                                 {"hybrid", r.p_hybrid.to_double()},
                                 {"quantum", r.p_quantum},
                                 {"algebraic", 1.0}};
  return indent < 0 ? j.dump() : j.dump(indent);
}

std::string bound_report_to_table(const BoundReport& r) {
  std::ostringstream out;
  out << "bound        value            sim. probability\n";
  const auto row = [&](const char* name, double v, double p, const char* extra) {
    out << std::left << std::setw(12) << name << " " << std::setw(16) << std::setprecision(12) << v << " "
        << std::setw(16) << std::setprecision(12) << p << " " << extra << "\n";
  };
  row("lhv", r.lhv.value.to_double(), r.p_lhv.to_double(), ("= " + r.lhv.value.to_string()).c_str());
  row("hybrid", r.hybrid.value.to_double(), r.p_hybrid.to_double(), ("= " + r.hybrid.value.to_string()).c_str());
  row("quantum", r.quantum.value, r.p_quantum, "achieved (lower bound certificate)");
  row("algebraic", r.algebraic.to_double(), 1.0, ("= " + r.algebraic.to_string()).c_str());
  return out.str();
}

}  // namespace nlbox
