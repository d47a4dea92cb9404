#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/bell.hpp"
#include "core/rational.hpp"
#include "core/rng.hpp"
#include "core/strategy.hpp"

namespace nlbox {

// Input bitmasks reuse the SettingMask packing: bit i is party i's input bit.
using InputMask = std::uint32_t;
using OutputMask = std::uint32_t;

// Target parity function g over n input bits: a box "operates properly" when
// the XOR of the n output bits equals g(inputs).
struct BoxPolynomial {
  int n = 0;
  std::vector<std::uint8_t> target;  // size 2^n, values 0/1

  std::uint8_t value(InputMask z) const { return target[z]; }
};

// The n-party box whose target is the XOR of all pairwise ANDs of the
// inputs; equivalently, g(z) = 1 iff q(q-1)/2 is odd with q = popcount(z).
BoxPolynomial svetlichny_box(int n, int cap = kPartyCap);

// Uniform per-party relabelings between box I/O and Bell-expression
// conventions. input_swap=false: input 0 <-> observable x. output_swap=false:
// output-XOR 0 <-> correlation +1.
struct BoxMapping {
  bool input_swap = false;
  bool output_swap = false;
};

// Unit-coefficient expression with coefficient +1 at setting s exactly when
// the box's required correlation under the mapping is +1.
BellExpression box_to_bell(const BoxPolynomial& p, BoxMapping m);

// Searches the four uniform mappings for one with box_to_bell(p, m) == e.
// e must have unit coefficients (throws non_unit_expression otherwise).
std::optional<BoxMapping> find_mapping(const BoxPolynomial& p, const BellExpression& e);

// Conditional distribution P(outputs | inputs) over n-bit outputs given
// n-bit inputs. Rows are indexed by the box input mask; within a row, output
// mask o carries bit i = party i's output, with output bit 1 encoding the
// "-1" outcome. Tables are exact rationals for analytic boxes and doubles
// for the quantum model.
struct BoxBehavior {
  int n = 0;
  bool exact = true;
  std::vector<std::vector<Rat64>> rows_exact;  // [2^n][2^n] when exact
  std::vector<std::vector<double>> rows_real;  // [2^n][2^n] when !exact
  std::string label;

  std::size_t size() const { return std::size_t{1} << n; }
  double prob(InputMask z, OutputMask o) const {
    return exact ? rows_exact[z][o].to_double() : rows_real[z][o];
  }
  const Rat64& prob_exact(InputMask z, OutputMask o) const { return rows_exact[z][o]; }
};

// The maximally mixed non-signaling behavior of a complete unit expression:
// P(o | z) = (1 + c(z) * (-1)^popcount(o)) / 2^n, so every joint probability
// is 0 or 2^(1-n), every strict-subset marginal is uniform, and the induced
// correlation at each setting equals the coefficient. Requires all 2^n
// settings present with coefficients +/-1 (identity I/O convention).
BoxBehavior canonical_distribution(const BellExpression& unit);

// canonical_distribution of box_to_bell(p, identity mapping): simulates p
// with probability 1.
BoxBehavior perfect_box(const BoxPolynomial& p);

// With probability p a canonical draw; with probability 1-p the last party's
// output bit is flipped after a canonical draw. XOR-correctness is exactly p
// on every input and all marginals stay uniform. 1/2 <= p <= 1.
BoxBehavior noisy_box(const BoxPolynomial& p, const Rat64& prob);

// Deterministic product behavior: party i outputs the bit fixed by its
// strategy sign for its own input (input 0 -> observable x).
BoxBehavior lhv_strategy_box(const DeterministicStrategy& strategy);

// N-party GHZ equatorial-measurement model:
// P(o | z) = (1 + (-1)^popcount(o) * cos(sum_i theta_i(z_i))) / 2^n.
BoxBehavior ghz_box(const GhzStrategy& angles);

struct NonsignalingViolation {
  std::string kind;       // "row_sum" | "marginal"
  std::uint32_t subset;   // party mask (marginal violations)
  InputMask input_a = 0;  // pair of full input masks whose K-marginals differ
  InputMask input_b = 0;
  double deviation = 0.0;
};

struct NonsignalingReport {
  bool pass = true;
  int subsets_checked = 0;
  std::vector<NonsignalingViolation> violations;
};

// Checks row normalization and, for every proper non-empty party subset K,
// that the marginal on K's outputs is identical across all inputs of the
// parties outside K. Exact for rational tables; `tol` applies to real ones.
NonsignalingReport verify_nonsignaling(const BoxBehavior& b, double tol = 1e-12);

// Probability that the output XOR equals g(inputs), averaged over uniform
// inputs. Exact overload requires an exact table.
Rat64 success_probability_exact(const BoxBehavior& b, const BoxPolynomial& p);
double success_probability(const BoxBehavior& b, const BoxPolynomial& p);

// Correlation induced at each input/setting: E[prod of +/-1 outcomes].
CorrelationAssignment correlations_of(const BoxBehavior& b);

// Draws an output mask from row `inputs`; deterministic given the stream.
OutputMask sample(const BoxBehavior& b, InputMask inputs, RngStream& rng);

// JSON: {"n": int, "label": str, "rows": [{"input": "01...", "probs": [...]}]}
// with probabilities as "num/den" strings for exact tables, numbers
// otherwise. Row order follows the input bitstring lexicographically.
std::string box_to_json(const BoxBehavior& b, int indent = -1);
BoxBehavior box_from_json(const std::string& json);

}  // namespace nlbox
