#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "core/bell.hpp"
#include "core/bounds.hpp"
#include "core/boxes.hpp"
#include "core/errors.hpp"

using namespace nlbox;

namespace {

// Oracle route for the target: parity of q(q-1)/2 with q = popcount(z).
int sign_rule_oracle(InputMask z) {
  const int q = std::popcount(z);
  return (q * (q - 1) / 2) & 1;
}

const double kSqrtHalf = 0.70710678118654752440;

GhzStrategy chsh_optimal_angles() {
  // party 1: (0, pi/2); party 2: (-pi/4, pi/4) — attains 2*sqrt(2) on CHSH.
  const double flat[4] = {0.0, 1.57079632679489661923, -0.78539816339744830962,
                          0.78539816339744830962};
  return GhzStrategy::from_flat(flat, 2);
}

}  // namespace

TEST_CASE("svetlichny_box matches the pairwise-AND definition and the sign rule") {
  const BoxPolynomial b2 = svetlichny_box(2);
  CHECK(b2.value(0b00) == 0);
  CHECK(b2.value(0b01) == 0);
  CHECK(b2.value(0b10) == 0);
  CHECK(b2.value(0b11) == 1);

  CHECK(svetlichny_box(3).value(0b111) == 1);  // q = 3, q(q-1)/2 = 3 odd
  CHECK(svetlichny_box(4).value(0b1111) == 0); // q = 4, six pairs
  CHECK(svetlichny_box(4).value(0b0111) == 1);

  for (int n = 2; n <= 12; ++n) {
    const BoxPolynomial p = svetlichny_box(n);
    for (InputMask z = 0; z < (InputMask{1} << n); ++z) CHECK(p.value(z) == sign_rule_oracle(z));
  }
  CHECK_THROWS_AS(svetlichny_box(1), Error);
}

TEST_CASE("box_to_bell: identity mapping sends the bipartite box to CHSH") {
  const BellExpression chsh = box_to_bell(svetlichny_box(2), BoxMapping{});
  CHECK(chsh == svetlichny(2));

  const BellExpression s3 = box_to_bell(svetlichny_box(3), BoxMapping{});
  CHECK(s3 == unit_form(svetlichny(3)).unit);

  BoxPolynomial zero;
  zero.n = 2;
  zero.target.assign(4, 0);
  const BellExpression all_plus = box_to_bell(zero, BoxMapping{});
  CHECK(all_plus.term_count() == 4);
  for (const auto& [s, c] : all_plus.terms) CHECK(c == Dyadic(1));
}

TEST_CASE("find_mapping certifies the box <-> inequality correspondence") {
  for (int n = 2; n <= 8; ++n) {
    const auto m = find_mapping(svetlichny_box(n), unit_form(svetlichny(n)).unit);
    REQUIRE(m.has_value());
    CHECK(box_to_bell(svetlichny_box(n), *m) == unit_form(svetlichny(n)).unit);
  }

  // Odd-n Klyshko has 2^(n-1) terms, so no box expression can match.
  const auto none = find_mapping(svetlichny_box(3), unit_form(klyshko(3)).unit);
  CHECK(!none.has_value());

  // Round trip through all four mappings.
  for (int input_swap = 0; input_swap < 2; ++input_swap)
    for (int output_swap = 0; output_swap < 2; ++output_swap) {
      const BoxMapping m{input_swap != 0, output_swap != 0};
      const BellExpression e = box_to_bell(svetlichny_box(4), m);
      const auto found = find_mapping(svetlichny_box(4), e);
      REQUIRE(found.has_value());
      CHECK(box_to_bell(svetlichny_box(4), *found) == e);
    }

  BellExpression non_unit = svetlichny(3);  // coefficients +/-1/2
  CHECK_THROWS_AS(find_mapping(svetlichny_box(3), non_unit), Error);
}

TEST_CASE("canonical_distribution: PR box table at n=2") {
  const BoxBehavior pr = canonical_distribution(svetlichny(2));
  for (InputMask z = 0; z < 4; ++z)
    for (OutputMask o = 0; o < 4; ++o) {
      const bool correct = (std::popcount(o) & 1) == (z == 0b11 ? 1 : 0);
      CHECK(pr.prob_exact(z, o) == (correct ? Rat64(1, 2) : Rat64(0)));
    }
}

TEST_CASE("canonical_distribution: joints in {0, 2^(1-n)}, uniform marginals, correlations") {
  for (int n = 2; n <= 5; ++n) {
    const BellExpression unit = unit_form(svetlichny(n)).unit;
    const BoxBehavior b = canonical_distribution(unit);
    const std::size_t rows = b.size();
    const Rat64 two_pow(2, static_cast<std::int64_t>(rows));
    for (InputMask z = 0; z < rows; ++z)
      for (OutputMask o = 0; o < rows; ++o) {
        const Rat64& p = b.prob_exact(z, o);
        CHECK((p == Rat64(0) || p == two_pow));
      }

    // Every k-party marginal equals 1/2^k for every k < n, on every input.
    for (std::uint32_t subset = 1; subset < rows - 1; ++subset) {
      const int k = std::popcount(subset);
      for (InputMask z = 0; z < rows; ++z) {
        std::vector<Rat64> marg(std::size_t{1} << k, Rat64(0));
        for (OutputMask o = 0; o < rows; ++o) {
          std::uint32_t packed = 0;
          int pos = 0;
          for (int i = 0; i < n; ++i) {
            if (!(subset & (1u << i))) continue;
            if (o & (1u << i)) packed |= 1u << pos;
            ++pos;
          }
          marg[packed] = marg[packed] + b.prob_exact(z, o);
        }
        for (const Rat64& m : marg) CHECK(m == Rat64(1, std::int64_t{1} << k));
      }
    }

    const CorrelationAssignment corr = correlations_of(b);
    for (const auto& [s, c] : unit.terms)
      CHECK(corr.at(s) == static_cast<double>(c.sign()));
  }

  CHECK_THROWS_AS(canonical_distribution(unit_form(klyshko(3)).unit), Error);  // incomplete
  CHECK_THROWS_AS(canonical_distribution(svetlichny(3)), Error);               // not unit
}

TEST_CASE("verify_nonsignaling passes constructors and catches a signaling table") {
  for (int n = 2; n <= 6; ++n)
    CHECK(verify_nonsignaling(canonical_distribution(unit_form(svetlichny(n)).unit)).pass);

  CHECK(verify_nonsignaling(noisy_box(svetlichny_box(3), Rat64(3, 4))).pass);
  CHECK(verify_nonsignaling(lhv_strategy_box(DeterministicStrategy::from_bits(0b1101, 2))).pass);
  CHECK(verify_nonsignaling(ghz_box(chsh_optimal_angles())).pass);

  // Hand-built signaling table: party 1's output copies party 2's input.
  BoxBehavior bad;
  bad.n = 2;
  bad.exact = true;
  bad.rows_exact.assign(4, std::vector<Rat64>(4, Rat64(0)));
  for (InputMask z = 0; z < 4; ++z) {
    const OutputMask o = (z >> 1) & 1;  // party 1 outputs party 2's input bit
    bad.rows_exact[z][o] = Rat64(1);
  }
  const NonsignalingReport report = verify_nonsignaling(bad);
  CHECK(!report.pass);
  REQUIRE(!report.violations.empty());
  bool names_party1 = false;
  for (const auto& v : report.violations)
    if (v.kind == "marginal" && v.subset == 0b01) names_party1 = true;
  CHECK(names_party1);
}

TEST_CASE("noisy_box: table equals canonical at p=1, exact success elsewhere") {
  const BoxPolynomial p3 = svetlichny_box(3);
  const BoxBehavior perfect = perfect_box(p3);
  const BoxBehavior no_noise = noisy_box(p3, Rat64(1));
  for (InputMask z = 0; z < 8; ++z)
    for (OutputMask o = 0; o < 8; ++o) CHECK(no_noise.prob_exact(z, o) == perfect.prob_exact(z, o));

  for (int n = 2; n <= 4; ++n) {
    const BoxPolynomial p = svetlichny_box(n);
    CHECK(success_probability_exact(noisy_box(p, Rat64(9, 10)), p) == Rat64(9, 10));
    CHECK(success_probability_exact(noisy_box(p, Rat64(937, 1000)), p) == Rat64(937, 1000));
  }

  // Per-input correctness is exactly p, and marginals stay uniform.
  const BoxBehavior noisy = noisy_box(svetlichny_box(3), Rat64(3, 4));
  for (InputMask z = 0; z < 8; ++z) {
    Rat64 correct(0);
    for (OutputMask o = 0; o < 8; ++o)
      if ((std::popcount(o) & 1) == svetlichny_box(3).value(z)) correct = correct + noisy.prob_exact(z, o);
    CHECK(correct == Rat64(3, 4));
    for (int party = 0; party < 3; ++party) {
      Rat64 m(0);
      for (OutputMask o = 0; o < 8; ++o)
        if (!(o & (1u << party))) m = m + noisy.prob_exact(z, o);
      CHECK(m == Rat64(1, 2));
    }
  }

  CHECK_THROWS_AS(noisy_box(p3, Rat64(1, 4)), Error);
  CHECK_THROWS_AS(noisy_box(p3, Rat64(11, 10)), Error);
}

TEST_CASE("lhv_strategy_box successes") {
  // All-parties-output-0: XOR always 0, success = fraction of inputs with g=0.
  DeterministicStrategy zeros;
  zeros.signs.assign(3, {1, 1});
  CHECK(success_probability_exact(lhv_strategy_box(zeros), svetlichny_box(3)) == Rat64(1, 2));

  // Best CHSH strategy reaches 3/4.
  const BellExpression chsh = box_to_bell(svetlichny_box(2), BoxMapping{});
  const auto best2 = lhv_max(chsh);
  CHECK(success_probability_exact(lhv_strategy_box(best2.strategy), svetlichny_box(2)) == Rat64(3, 4));

  // Best 4-party strategy reaches 1/2 + 1/2^3.
  const BellExpression e4 = box_to_bell(svetlichny_box(4), BoxMapping{});
  const auto best4 = lhv_max(e4);
  CHECK(success_probability_exact(lhv_strategy_box(best4.strategy), svetlichny_box(4)) == Rat64(5, 8));

  // The P_LHV law at box level: best simulation is 1/2 + 1/2^(floor(n/2)+1).
  for (int n = 2; n <= 6; ++n) {
    const BoxPolynomial poly = svetlichny_box(n);
    const auto best = lhv_max(box_to_bell(poly, BoxMapping{}));
    CHECK(success_probability_exact(lhv_strategy_box(best.strategy), poly) ==
          Rat64(1, 2) + Rat64(1, std::int64_t{1} << (n / 2 + 1)));
  }
}

TEST_CASE("ghz_box: all-zero angles give correlation +1 everywhere; CHSH optimum hits 85.36%") {
  GhzStrategy flat_zero;
  flat_zero.angles.assign(3, {0.0, 0.0});
  const CorrelationAssignment c = correlations_of(ghz_box(flat_zero));
  for (const auto& [s, v] : c) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));

  const BoxBehavior chsh_ghz = ghz_box(chsh_optimal_angles());
  CHECK(success_probability(chsh_ghz, svetlichny_box(2)) ==
        doctest::Approx(0.5 + 0.25 * kSqrtHalf * 2.0).epsilon(1e-12));

  // success = (1 + V / 2^n) / 2 with V the Bell value of the correlations.
  const double v = evaluate(box_to_bell(svetlichny_box(2), BoxMapping{}), correlations_of(chsh_ghz));
  CHECK(success_probability(chsh_ghz, svetlichny_box(2)) ==
        doctest::Approx(0.5 * (1.0 + v / 4.0)).epsilon(1e-12));
}

TEST_CASE("perfect boxes maximize their inequality") {
  for (int n = 2; n <= 5; ++n) {
    const BoxPolynomial p = svetlichny_box(n);
    const BoxBehavior b = perfect_box(p);
    CHECK(success_probability_exact(b, p) == Rat64(1));
    const BellExpression e = box_to_bell(p, BoxMapping{});
    CHECK(evaluate(e, correlations_of(b)) ==
          doctest::Approx(algebraic_max(e).to_double()).epsilon(1e-12));
  }
}

TEST_CASE("sampling: exactness at deterministic rows, reproducibility, convergence") {
  const BoxBehavior pr = canonical_distribution(svetlichny(2));
  RngStream rng(7, 0);
  int xor_one = 0;
  for (int i = 0; i < 100000; ++i) xor_one += std::popcount(sample(pr, 0b11, rng)) & 1;
  CHECK(xor_one == 100000);  // every draw satisfies XOR = AND = 1

  // Deterministic given (seed, stream): identical sequences.
  RngStream a(123, 5), b(123, 5);
  for (int i = 0; i < 200; ++i) CHECK(sample(pr, i & 3, a) == sample(pr, i & 3, b));
  RngStream c(123, 6);
  int diff = 0;
  for (int i = 0; i < 200; ++i) {
    RngStream aa(123, 5);
    aa.counter = static_cast<std::uint64_t>(i);
    RngStream cc(123, 6);
    cc.counter = static_cast<std::uint64_t>(i);
    if (sample(pr, 0, aa) != sample(pr, 0, cc)) ++diff;
  }
  CHECK(diff > 0);

  // Noisy XOR-correct frequency within 3 sigma at the pinned seed.
  const BoxPolynomial p3 = svetlichny_box(3);
  const BoxBehavior noisy = noisy_box(p3, Rat64(9, 10));
  RngStream r2(2024, 1);
  const int trials = 100000;
  int ok = 0;
  for (int i = 0; i < trials; ++i) {
    const InputMask z = static_cast<InputMask>(r2.next_below(8));
    const OutputMask o = sample(noisy, z, r2);
    ok += (std::popcount(o) & 1) == p3.value(z) ? 1 : 0;
  }
  const double phat = static_cast<double>(ok) / trials;
  CHECK(std::abs(phat - 0.9) < 3.0 * std::sqrt(0.9 * 0.1 / trials));

  // Chi-square of one canonical row at 1e5 draws: 2^(n-1) = 4 live cells,
  // df 3, critical value 11.345 at significance 0.01.
  const BoxBehavior s3 = canonical_distribution(unit_form(svetlichny(3)).unit);
  RngStream r3(99, 0);
  std::vector<int> counts(8, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[sample(s3, 0b101, r3)];
  double chi2 = 0.0;
  for (OutputMask o = 0; o < 8; ++o) {
    const double expect = s3.prob(0b101, o) * draws;
    if (expect == 0.0) {
      CHECK(counts[o] == 0);
      continue;
    }
    chi2 += (counts[o] - expect) * (counts[o] - expect) / expect;
  }
  CHECK(chi2 < 11.345);
}

TEST_CASE("box JSON round-trips exact and real tables") {
  const BoxBehavior noisy = noisy_box(svetlichny_box(2), Rat64(19, 20));
  const BoxBehavior back = box_from_json(box_to_json(noisy));
  REQUIRE(back.exact);
  CHECK(back.n == 2);
  CHECK(back.label == noisy.label);
  for (InputMask z = 0; z < 4; ++z)
    for (OutputMask o = 0; o < 4; ++o) CHECK(back.prob_exact(z, o) == noisy.prob_exact(z, o));

  const BoxBehavior ghz = ghz_box(chsh_optimal_angles());
  const BoxBehavior ghz_back = box_from_json(box_to_json(ghz));
  REQUIRE(!ghz_back.exact);
  for (InputMask z = 0; z < 4; ++z)
    for (OutputMask o = 0; o < 4; ++o)
      CHECK(ghz_back.rows_real[z][o] == doctest::Approx(ghz.rows_real[z][o]).epsilon(1e-15));
}

TEST_CASE("rat_from_decimal parses probabilities exactly") {
  CHECK(rat_from_decimal("0.95") == Rat64(19, 20));
  CHECK(rat_from_decimal("0.9") == Rat64(9, 10));
  CHECK(rat_from_decimal("1") == Rat64(1));
  CHECK(rat_from_decimal("0.937") == Rat64(937, 1000));
  CHECK_THROWS_AS(rat_from_decimal("abc"), Error);
}
