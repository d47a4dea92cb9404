#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/bell.hpp"
#include "core/rational.hpp"
#include "core/strategy.hpp"

namespace nlbox {

struct LhvResult {
  Dyadic value;
  DeterministicStrategy strategy;
};

// Exact maximum of sum_s c(s) * prod_i e_{s_i}(i) over all 4^n deterministic
// sign strategies (shared randomness cannot beat this, by convexity). The
// enumeration visits strategies in increasing packed-bits order and keeps the
// first maximum, so the witness is reproducible. n <= max_n (default 12).
LhvResult lhv_max(const BellExpression& e, int max_n = 12);

struct HybridResult {
  Dyadic value;
  Bipartition partition;
};

// Maximum over bipartitions (A|B) of max over arbitrary sign functions
// a: settings(A) -> +/-1, b: settings(B) -> +/-1 of sum_s c(s) a(s_A) b(s_B):
// unrestricted (even signaling) correlations inside each block, none across.
// Computed exactly by enumerating the smaller block's sign functions and
// folding the larger block through sum_{s_B} |sum_{s_A} c a|. n <= 7.
HybridResult hybrid_max(const BellExpression& e);

struct GhzConfig {
  int multistarts = 32;
  double grad_tol = 1e-9;
  int max_iters = 10000;
  std::uint64_t seed = 0;
  int threads = 1;  // 0 = machine parallelism
};

struct GhzResult {
  double value = 0.0;
  GhzStrategy strategy;
  bool converged = false;
};

// Maximizes V(theta) = sum_s c(s) cos(sum_i theta_i^{s_i}) by multistart
// gradient ascent with analytic gradient and backtracking line search. This
// is an achievability certificate (lower bound); no upper bound is computed.
GhzResult ghz_max(const BellExpression& e, const GhzConfig& config = {});

// The objective and its analytic gradient at theta (length 2n, laid out as
// theta[2i + observable]); exposed so the gradient can be checked against
// finite differences.
double ghz_value(const BellExpression& e, const std::vector<double>& theta);
double ghz_value_and_grad(const BellExpression& e, const std::vector<double>& theta,
                          std::vector<double>& grad);

// Box-simulation success probability (1 + v/total_weight) / 2 of any behavior
// whose Bell value is v. Requires |v| <= total_weight.
double sim_probability(double v, double total_weight);
Rat64 sim_probability_exact(const Rat64& v, const Rat64& total_weight);

struct BoundReport {
  int n = 0;
  LhvResult lhv;
  HybridResult hybrid;
  GhzResult quantum;  // achieved value (lower bound certificate)
  Dyadic algebraic;
  Rat64 p_lhv;
  Rat64 p_hybrid;
  double p_quantum = 0.0;
  Rat64 p_algebraic;
};

// All four bounds of svetlichny(n), plus the derived simulation
// probabilities. Enforces lhv <= hybrid <= quantum <= algebraic.
BoundReport bound_report(int n, const GhzConfig& config = {});

std::string bound_report_to_json(const BoundReport& r, int indent = -1);
std::string bound_report_to_table(const BoundReport& r);

}  // namespace nlbox
