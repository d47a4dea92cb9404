#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "core/boxes.hpp"
#include "core/rational.hpp"
#include "core/rng.hpp"

namespace nlbox {

// ===== von Neumann boosting arithmetic =====

// Probability that the majority of three independent attempts, each correct
// with probability p, is correct: p^3 + 3p^2(1-p).
double majority_of_three(double p);

// One boosting round: compute f three times (each correct with probability
// p), then take the nonlocal majority, itself correct with probability q_maj.
// A wrong majority gadget flips the output exactly, so
// p' = q*m(p) + (1-q)*(1-m(p)).
double boost_map(double p, double q_maj);

// The nontrivial fixed point s = 1/2 + 3*sqrt(d)/(2*sqrt(1+3d)), d = q - 5/6.
// Defined for q_maj > 5/6 (throws q_too_small otherwise); boosting from
// 1/2 < p < s converges upward toward s.
double fixed_point_s(double q_maj);

struct BoostParams {
  double q_maj = 0.0;
  double delta = 0.0;  // q_maj - 5/6
  double s = 0.0;
};
BoostParams boost_params(double q_maj);

// Iterates boost_map from p0 until |p' - p| < 1e-9 or max_rounds, returning
// the trajectory including p0.
std::vector<double> boost_iterate(double p0, double q_maj, int max_rounds = 64);

struct Thresholds {
  double p2_closed = 0.0;  // (1 + sqrt(2/3)) / 2, root of p^2 + (1-p)^2 = 5/6
  double p2_bisect = 0.0;  // same root by bisection (cross-check)
  double p3 = 0.0;         // root of p^3 + 3p(1-p)^2 = 5/6 on [1/2, 1]
};
// Minimal per-box success probabilities for the majority gadget to clear
// 5/6: p2 for the two-box bipartite construction, p3 for the three-box
// multipartite one.
Thresholds thresholds();

// ===== distributed protocols =====
//
// Parties are pure functions of (own input, shared randomness, box I/O); the
// simulator holds the randomness and samples box outputs jointly. Every run
// records a transcript so the no-communication audit can recompute each
// share from party-local data alone.

using BoolFn = std::function<int(const std::vector<std::vector<int>>&)>;

// Shared-randomness base protocol. The shared data is a uniform guess of the
// full input plus the deterministic XOR-sharing (f(guess), 0, ..., 0); a
// party whose real input matches its guessed component emits its share,
// otherwise its share XOR a private uniform bit. XOR of shares equals
// f(inputs) with probability exactly 1/2 + 2^-(M+1) over the randomness,
// M = total input bits. Randomness is passed in explicitly so tests can
// enumerate it exhaustively.
std::vector<int> base_protocol_shares(const BoolFn& f, const std::vector<std::vector<int>>& inputs,
                                      const std::vector<std::vector<int>>& guess,
                                      const std::vector<int>& mismatch_bits);

struct BoxCall {
  std::vector<int> party_inputs;  // bit fed by each participating party
  OutputMask outputs = 0;         // sampled joint output mask
};

struct ProtocolRun {
  std::vector<int> shares;
  std::vector<BoxCall> calls;
};

// Truth values the harness scores against.
int equality_predicate(const std::vector<std::array<int, 3>>& triples);
int majority_predicate(const std::vector<std::array<int, 3>>& triples);

// N-party nonlocal equality from three n-party boxes: party i feeds x'_i,
// x''_i, x'_i ^ x''_i into boxes 1..3 (party n folds the negations) and
// outputs (x'_i & x''_i) ^ a1_i ^ a2_i ^ a3_i. With perfect boxes the XOR of
// shares is [sum x^1 = sum x^2] & [sum x^2 = sum x^3].
ProtocolRun nonlocal_equality(const std::vector<std::array<int, 3>>& triples, const BoxBehavior& box,
                              RngStream& rng);

// Same predicate from n(n-1) bipartite boxes, one per ordered pair (i, j),
// i != j, enumerated i-major; box (i, j) computes x'_i & x''_j.
ProtocolRun nonlocal_equality_bipartite(const std::vector<std::array<int, 3>>& triples,
                                        const BoxBehavior& pair_box, RngStream& rng);

// Majority from equality shares: party 1 flips its share and every party
// XORs in x^1_i ^ x^2_i ^ x^3_i, giving XOR = Maj(z^1, z^2, z^3).
std::vector<int> majority_from_equality(const std::vector<std::array<int, 3>>& triples,
                                        std::vector<int> equality_shares);

// Recomputes shares and box inputs from party-local data plus the recorded
// box outputs; false means some share could not be derived locally.
bool audit_equality_run(const std::vector<std::array<int, 3>>& triples, const ProtocolRun& run,
                        bool bipartite);

// Closed forms for the equality gadget under i.i.d. box noise.
double equality_success_3box(double p_box);
double equality_success_bipartite(double p_box, int n);

// ===== Monte Carlo harness =====

enum class ProtocolKind { equality, majority, boost, end_to_end };

struct ScenarioConfig {
  ProtocolKind protocol = ProtocolKind::equality;
  int n = 3;
  std::string box_kind = "perfect";  // perfect | noisy | lhv | ghz
  Rat64 box_p = Rat64(1);            // noisy only
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  int rounds = 3;           // boost / end_to_end
  bool bipartite = false;   // equality only
  int bits_per_party = 1;   // end_to_end
  std::string f = "and";    // end_to_end: and | xor
  double p0 = 0.75;         // boost: synthetic base success
  int threads = 0;          // 0 = machine parallelism
};

ScenarioConfig scenario_from_json(const std::string& json);
std::string scenario_to_json(const ScenarioConfig& c, int indent = -1);

struct RoundStat {
  int round = 0;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double p_empirical = 0.0;
  double p_analytic = 0.0;  // NaN when no closed form applies
  double std_err = 0.0;
};

struct TrialStats {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double p_empirical = 0.0;
  double std_err = 0.0;
  double p_analytic = 0.0;  // NaN when no closed form applies
  std::uint64_t seed = 0;
  bool audit_passed = true;
  int gather_bits = 0;  // shares collected by one referee: n - 1 bits
  std::vector<RoundStat> curve;  // boost / end_to_end only
};

// Runs independent trials on per-trial RngStreams (deterministic for a given
// seed regardless of thread count) and audits every trial.
TrialStats run_trials(const ScenarioConfig& config);

std::string stats_to_json(const TrialStats& s, const ScenarioConfig& c, int indent = -1);
// Plot-ready curve: "round,p_empirical,p_analytic,stderr" rows.
std::string curve_to_csv(const TrialStats& s);

}  // namespace nlbox
