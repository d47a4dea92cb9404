#include "core/protocol.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "core/bounds.hpp"
#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace nlbox {

// ===== boosting arithmetic =====

double majority_of_three(double p) { return p * p * (3.0 - 2.0 * p); }

double boost_map(double p, double q_maj) {
  const double m = majority_of_three(p);
  return q_maj * m + (1.0 - q_maj) * (1.0 - m);
}

BoostParams boost_params(double q_maj) {
  if (!(q_maj > 5.0 / 6.0)) fail(errc::q_too_small, "majority success must exceed 5/6");
  BoostParams b;
  b.q_maj = q_maj;
  b.delta = q_maj - 5.0 / 6.0;
  b.s = 0.5 + 3.0 * std::sqrt(b.delta) / (2.0 * std::sqrt(1.0 + 3.0 * b.delta));
  return b;
}

double fixed_point_s(double q_maj) { return boost_params(q_maj).s; }

std::vector<double> boost_iterate(double p0, double q_maj, int max_rounds) {
  std::vector<double> traj{p0};
  double p = p0;
  for (int r = 0; r < max_rounds; ++r) {
    const double next = boost_map(p, q_maj);
    traj.push_back(next);
    if (std::abs(next - p) < 1e-9) break;
    p = next;
  }
  return traj;
}

namespace {

double bisect_increasing(const std::function<double(double)>& f, double lo, double hi, double target) {
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Thresholds thresholds() {
  Thresholds t;
  t.p2_closed = 0.5 * (1.0 + std::sqrt(2.0 / 3.0));
  t.p2_bisect = bisect_increasing([](double p) { return p * p + (1.0 - p) * (1.0 - p); }, 0.5, 1.0, 5.0 / 6.0);
  t.p3 = bisect_increasing([](double p) { return p * p * p + 3.0 * p * (1.0 - p) * (1.0 - p); }, 0.5, 1.0,
                           5.0 / 6.0);
  return t;
}

// ===== distributed protocols =====

std::vector<int> base_protocol_shares(const BoolFn& f, const std::vector<std::vector<int>>& inputs,
                                      const std::vector<std::vector<int>>& guess,
                                      const std::vector<int>& mismatch_bits) {
  const std::size_t n = inputs.size();
  if (guess.size() != n || mismatch_bits.size() != n) fail(errc::invalid_argument, "randomness size mismatch");
  std::vector<int> shares(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    // Shared data: the full guess; the XOR-sharing of f(guess) puts the whole
    // value on party 0 and zeros elsewhere.
    const int r_i = i == 0 ? (f(guess) & 1) : 0;
    shares[i] = inputs[i] == guess[i] ? r_i : (r_i ^ (mismatch_bits[i] & 1));
  }
  return shares;
}

int equality_predicate(const std::vector<std::array<int, 3>>& triples) {
  int z1 = 0, z2 = 0, z3 = 0;
  for (const auto& t : triples) {
    z1 ^= t[0] & 1;
    z2 ^= t[1] & 1;
    z3 ^= t[2] & 1;
  }
  return (z1 == z2 && z2 == z3) ? 1 : 0;
}

int majority_predicate(const std::vector<std::array<int, 3>>& triples) {
  int z1 = 0, z2 = 0, z3 = 0;
  for (const auto& t : triples) {
    z1 ^= t[0] & 1;
    z2 ^= t[1] & 1;
    z3 ^= t[2] & 1;
  }
  return (z1 + z2 + z3) >= 2 ? 1 : 0;
}

namespace {

// Party-local derived inputs: x'_i = x^1_i ^ x^2_i and x''_i = x^2_i ^ x^3_i,
// with the last party folding the negations (x'_n = x^1_n ^ ~x^2_n, same for
// x''_n) so that sum x' = [sum x^1 = sum x^2] and likewise for x''.
void derived_inputs(const std::vector<std::array<int, 3>>& triples, std::vector<int>& xp,
                    std::vector<int>& xpp) {
  const std::size_t n = triples.size();
  xp.resize(n);
  xpp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int last = i + 1 == n ? 1 : 0;
    xp[i] = (triples[i][0] ^ triples[i][1] ^ last) & 1;
    xpp[i] = (triples[i][1] ^ triples[i][2] ^ last) & 1;
  }
}

}  // namespace

ProtocolRun nonlocal_equality(const std::vector<std::array<int, 3>>& triples, const BoxBehavior& box,
                              RngStream& rng) {
  const int n = static_cast<int>(triples.size());
  if (box.n != n) fail(errc::dimension_mismatch, "box arity does not match party count");
  std::vector<int> xp, xpp;
  derived_inputs(triples, xp, xpp);

  ProtocolRun run;
  run.calls.resize(3);
  for (int b = 0; b < 3; ++b) {
    auto& call = run.calls[b];
    call.party_inputs.resize(n);
    InputMask z = 0;
    for (int i = 0; i < n; ++i) {
      const int bit = b == 0 ? xp[i] : (b == 1 ? xpp[i] : (xp[i] ^ xpp[i]));
      call.party_inputs[i] = bit;
      if (bit) z |= InputMask{1} << i;
    }
    call.outputs = sample(box, z, rng);
  }

  run.shares.resize(n);
  for (int i = 0; i < n; ++i) {
    int a = xp[i] & xpp[i];
    for (int b = 0; b < 3; ++b) a ^= (run.calls[b].outputs >> i) & 1;
    run.shares[i] = a;
  }
  return run;
}

ProtocolRun nonlocal_equality_bipartite(const std::vector<std::array<int, 3>>& triples,
                                        const BoxBehavior& pair_box, RngStream& rng) {
  const int n = static_cast<int>(triples.size());
  if (pair_box.n != 2) fail(errc::dimension_mismatch, "pair box must be bipartite");
  if (n < 2) fail(errc::invalid_argument, "need at least two parties");
  std::vector<int> xp, xpp;
  derived_inputs(triples, xp, xpp);

  ProtocolRun run;
  run.calls.reserve(static_cast<std::size_t>(n) * (n - 1));
  std::vector<int> box_acc(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      BoxCall call;
      call.party_inputs = {xp[i], xpp[j]};
      const InputMask z = static_cast<InputMask>(xp[i] | (xpp[j] << 1));
      call.outputs = sample(pair_box, z, rng);
      box_acc[i] ^= call.outputs & 1;
      box_acc[j] ^= (call.outputs >> 1) & 1;
      run.calls.push_back(std::move(call));
    }

  run.shares.resize(n);
  for (int i = 0; i < n; ++i) run.shares[i] = (xp[i] & xpp[i]) ^ box_acc[i];
  return run;
}

std::vector<int> majority_from_equality(const std::vector<std::array<int, 3>>& triples,
                                        std::vector<int> equality_shares) {
  if (triples.size() != equality_shares.size()) fail(errc::dimension_mismatch, "share count mismatch");
  equality_shares[0] ^= 1;
  for (std::size_t i = 0; i < triples.size(); ++i)
    equality_shares[i] ^= (triples[i][0] ^ triples[i][1] ^ triples[i][2]) & 1;
  return equality_shares;
}

bool audit_equality_run(const std::vector<std::array<int, 3>>& triples, const ProtocolRun& run,
                        bool bipartite) {
  const int n = static_cast<int>(triples.size());
  std::vector<int> xp, xpp;
  derived_inputs(triples, xp, xpp);
  std::vector<int> expect(n);
  if (!bipartite) {
    if (run.calls.size() != 3) return false;
    for (int b = 0; b < 3; ++b)
      for (int i = 0; i < n; ++i) {
        const int bit = b == 0 ? xp[i] : (b == 1 ? xpp[i] : (xp[i] ^ xpp[i]));
        if (run.calls[b].party_inputs[i] != bit) return false;
      }
    for (int i = 0; i < n; ++i) {
      int a = xp[i] & xpp[i];
      for (int b = 0; b < 3; ++b) a ^= (run.calls[b].outputs >> i) & 1;
      expect[i] = a;
    }
  } else {
    if (run.calls.size() != static_cast<std::size_t>(n) * (n - 1)) return false;
    std::vector<int> box_acc(n, 0);
    std::size_t k = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const auto& call = run.calls[k++];
        if (call.party_inputs[0] != xp[i] || call.party_inputs[1] != xpp[j]) return false;
        box_acc[i] ^= call.outputs & 1;
        box_acc[j] ^= (call.outputs >> 1) & 1;
      }
    for (int i = 0; i < n; ++i) expect[i] = (xp[i] & xpp[i]) ^ box_acc[i];
  }
  return expect == run.shares;
}

double equality_success_3box(double p_box) {
  // Success iff an even number of the three boxes misfire.
  return p_box * p_box * p_box + 3.0 * p_box * (1.0 - p_box) * (1.0 - p_box);
}

double equality_success_bipartite(double p_box, int n) {
  return 0.5 * (1.0 + std::pow(2.0 * p_box - 1.0, n * (n - 1)));
}

// ===== Monte Carlo harness =====

namespace {

ProtocolKind protocol_from_string(const std::string& s) {
  if (s == "equality") return ProtocolKind::equality;
  if (s == "majority") return ProtocolKind::majority;
  if (s == "boost") return ProtocolKind::boost;
  if (s == "end_to_end") return ProtocolKind::end_to_end;
  fail(errc::bad_config, "unknown protocol \"" + s + "\"");
}

std::string protocol_to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::equality: return "equality";
    case ProtocolKind::majority: return "majority";
    case ProtocolKind::boost: return "boost";
    case ProtocolKind::end_to_end: return "end_to_end";
  }
  return "?";
}

Rat64 rat_from_json_number(const nlohmann::json& v) {
  if (v.is_string()) return rat_from_decimal(v.get<std::string>());
  // Round the double to 12 significant decimals; exact for any probability
  // that was written as a short decimal literal.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v.get<double>());
  std::string s(buf);
  if (s.find('e') != std::string::npos || s.find('-') != std::string::npos)
    fail(errc::bad_config, "probability must be a plain decimal in [0, 1]");
  return rat_from_decimal(s);
}

BoxBehavior make_scenario_box(const ScenarioConfig& c, int arity) {
  const BoxPolynomial poly = svetlichny_box(arity);
  if (c.box_kind == "perfect") return perfect_box(poly);
  if (c.box_kind == "noisy") return noisy_box(poly, c.box_p);
  const BellExpression target = box_to_bell(poly, BoxMapping{});
  if (c.box_kind == "lhv") return lhv_strategy_box(lhv_max(target).strategy);
  if (c.box_kind == "ghz") {
    GhzConfig g;
    g.multistarts = 8;
    g.seed = c.seed;
    g.threads = 1;
    return ghz_box(ghz_max(target, g).strategy);
  }
  fail(errc::bad_config, "unknown box kind \"" + c.box_kind + "\"");
}

// Analytic per-box XOR-success, when one exists.
double box_success_analytic(const ScenarioConfig& c) {
  if (c.box_kind == "perfect") return 1.0;
  if (c.box_kind == "noisy") return c.box_p.to_double();
  return std::numeric_limits<double>::quiet_NaN();
}

struct ChunkResult {
  std::uint64_t successes = 0;
  bool audit_passed = true;
};

BoolFn named_function(const std::string& name) {
  if (name == "and") {
    return [](const std::vector<std::vector<int>>& in) {
      int v = 1;
      for (const auto& bits : in)
        for (const int b : bits) v &= b;
      return v;
    };
  }
  if (name == "xor") {
    return [](const std::vector<std::vector<int>>& in) {
      int v = 0;
      for (const auto& bits : in)
        for (const int b : bits) v ^= b;
      return v;
    };
  }
  fail(errc::bad_config, "unknown function \"" + name + "\"");
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(errc::bad_config, std::string("bad scenario JSON: ") + ex.what());
  }
  ScenarioConfig c;
  if (!j.is_object() || !j.contains("protocol")) fail(errc::bad_config, "scenario needs \"protocol\"");
  c.protocol = protocol_from_string(j.at("protocol").get<std::string>());
  c.n = j.value("n", 3);
  if (c.n < 2 || c.n > 10) fail(errc::bad_config, "scenario n must be in [2, 10]");
  if (j.contains("box")) {
    const auto& b = j.at("box");
    c.box_kind = b.value("kind", "perfect");
    if (c.box_kind == "noisy") {
      if (!b.contains("p")) fail(errc::bad_config, "noisy box needs \"p\"");
      c.box_p = rat_from_json_number(b.at("p"));
      if (c.box_p < Rat64(1, 2) || c.box_p > Rat64(1))
        fail(errc::bad_config, "box p must be in [1/2, 1]");
    }
  }
  c.trials = j.value("trials", std::uint64_t{10000});
  if (c.trials < 1) fail(errc::bad_config, "trials must be >= 1");
  c.seed = j.value("seed", std::uint64_t{0});
  c.rounds = j.value("rounds", 3);
  if (c.rounds < 0 || c.rounds > 8) fail(errc::bad_config, "rounds must be in [0, 8]");
  const std::string variant = j.value("variant", "multipartite");
  if (variant == "bipartite")
    c.bipartite = true;
  else if (variant != "multipartite")
    fail(errc::bad_config, "variant must be multipartite or bipartite");
  if (c.bipartite && c.protocol != ProtocolKind::equality)
    fail(errc::bad_config, "bipartite variant applies to the equality protocol only");
  c.bits_per_party = j.value("bits_per_party", 1);
  if (c.bits_per_party < 1 || c.n * c.bits_per_party > 20)
    fail(errc::bad_config, "total input size capped at 20 bits");
  c.f = j.value("f", "and");
  named_function(c.f);  // validate
  c.p0 = j.value("p0", 0.75);
  if (!(c.p0 >= 0.5 && c.p0 <= 1.0)) fail(errc::bad_config, "p0 must be in [1/2, 1]");
  c.threads = j.value("threads", 0);
  return c;
}

std::string scenario_to_json(const ScenarioConfig& c, int indent) {
  nlohmann::ordered_json j;
  j["protocol"] = protocol_to_string(c.protocol);
  j["n"] = c.n;
  j["box"] = {{"kind", c.box_kind}};
  if (c.box_kind == "noisy") j["box"]["p"] = c.box_p.to_double();
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  if (c.protocol == ProtocolKind::boost || c.protocol == ProtocolKind::end_to_end) {
    j["rounds"] = c.rounds;
    if (c.protocol == ProtocolKind::boost) j["p0"] = c.p0;
    if (c.protocol == ProtocolKind::end_to_end) {
      j["bits_per_party"] = c.bits_per_party;
      j["f"] = c.f;
    }
  }
  if (c.protocol == ProtocolKind::equality) j["variant"] = c.bipartite ? "bipartite" : "multipartite";
  return indent < 0 ? j.dump() : j.dump(indent);
}

namespace {

// One equality/majority trial; returns success flag, accumulates audit.
bool run_flat_trial(const ScenarioConfig& c, const BoxBehavior& box, std::uint64_t trial,
                    bool* audit_ok) {
  RngStream rng(c.seed, trial);
  std::vector<std::array<int, 3>> triples(static_cast<std::size_t>(c.n));
  for (auto& t : triples)
    for (int j = 0; j < 3; ++j) t[j] = rng.next_bit();

  ProtocolRun run = c.bipartite ? nonlocal_equality_bipartite(triples, box, rng)
                                : nonlocal_equality(triples, box, rng);
  *audit_ok &= audit_equality_run(triples, run, c.bipartite);

  int xor_shares = 0;
  int truth = 0;
  if (c.protocol == ProtocolKind::majority) {
    const std::vector<int> shares = majority_from_equality(triples, run.shares);
    for (const int s : shares) xor_shares ^= s;
    truth = majority_predicate(triples);
  } else {
    for (const int s : run.shares) xor_shares ^= s;
    truth = equality_predicate(triples);
  }
  return xor_shares == truth;
}

// Recursive boosted attempt: round 0 is the base (real or synthetic), each
// further round majority-combines three independent sub-attempts.
std::vector<int> boosted_attempt(const ScenarioConfig& c, const BoxBehavior& box, int round,
                                 const std::function<std::vector<int>(RngStream&)>& base, RngStream& rng,
                                 bool* audit_ok) {
  if (round == 0) return base(rng);
  const auto s1 = boosted_attempt(c, box, round - 1, base, rng, audit_ok);
  const auto s2 = boosted_attempt(c, box, round - 1, base, rng, audit_ok);
  const auto s3 = boosted_attempt(c, box, round - 1, base, rng, audit_ok);
  std::vector<std::array<int, 3>> triples(static_cast<std::size_t>(c.n));
  for (int i = 0; i < c.n; ++i) triples[static_cast<std::size_t>(i)] = {s1[i], s2[i], s3[i]};
  ProtocolRun eq = nonlocal_equality(triples, box, rng);
  *audit_ok &= audit_equality_run(triples, eq, false);
  return majority_from_equality(triples, eq.shares);
}

}  // namespace

TrialStats run_trials(const ScenarioConfig& c) {
  TrialStats stats;
  stats.seed = c.seed;
  stats.gather_bits = c.n - 1;

  const bool flat = c.protocol == ProtocolKind::equality || c.protocol == ProtocolKind::majority;
  const BoxBehavior box = make_scenario_box(c, c.bipartite ? 2 : c.n);
  const double p_box = box_success_analytic(c);

  const auto run_round = [&](int round, std::uint64_t stream_base) {
    RoundStat rs;
    rs.round = round;
    rs.trials = c.trials;
    const BoolFn f = named_function(c.f);
    const auto chunks = parallel_chunks<ChunkResult>(
        0, c.trials, c.threads, [&](std::size_t, std::uint64_t lo, std::uint64_t hi) {
          ChunkResult acc;
          for (std::uint64_t t = lo; t < hi; ++t) {
            bool audit_ok = true;
            bool success = false;
            if (flat) {
              success = run_flat_trial(c, box, t, &audit_ok);
            } else {
              RngStream rng(c.seed, stream_base + t);
              int truth = 0;
              std::function<std::vector<int>(RngStream&)> base;
              std::vector<std::vector<int>> inputs;
              if (c.protocol == ProtocolKind::boost) {
                truth = rng.next_bit();
                base = [&](RngStream& r) {
                  // Synthetic base attempt: XOR of shares equals `truth` with
                  // probability p0; party 0 carries the error bit.
                  std::vector<int> shares(static_cast<std::size_t>(c.n));
                  int acc_bits = 0;
                  for (int i = 1; i < c.n; ++i) {
                    shares[static_cast<std::size_t>(i)] = r.next_bit();
                    acc_bits ^= shares[static_cast<std::size_t>(i)];
                  }
                  const int err = r.next_double() < c.p0 ? 0 : 1;
                  shares[0] = truth ^ acc_bits ^ err;
                  return shares;
                };
              } else {
                inputs.assign(static_cast<std::size_t>(c.n),
                              std::vector<int>(static_cast<std::size_t>(c.bits_per_party)));
                for (auto& bits : inputs)
                  for (auto& b : bits) b = rng.next_bit();
                truth = f(inputs);
                base = [&](RngStream& r) {
                  std::vector<std::vector<int>> guess(inputs.size(),
                                                      std::vector<int>(static_cast<std::size_t>(c.bits_per_party)));
                  for (auto& bits : guess)
                    for (auto& b : bits) b = r.next_bit();
                  std::vector<int> mismatch(static_cast<std::size_t>(c.n));
                  for (auto& b : mismatch) b = r.next_bit();
                  return base_protocol_shares(f, inputs, guess, mismatch);
                };
              }
              const std::vector<int> shares = boosted_attempt(c, box, round, base, rng, &audit_ok);
              int x = 0;
              for (const int s : shares) x ^= s;
              success = x == truth;
            }
            acc.successes += success ? 1 : 0;
            acc.audit_passed &= audit_ok;
          }
          return acc;
        });
    std::uint64_t successes = 0;
    for (const auto& ch : chunks) {
      successes += ch.successes;
      stats.audit_passed &= ch.audit_passed;
    }
    rs.successes = successes;
    rs.p_empirical = static_cast<double>(successes) / static_cast<double>(c.trials);
    rs.std_err = std::sqrt(std::max(rs.p_empirical * (1.0 - rs.p_empirical), 1e-12) /
                           static_cast<double>(c.trials));
    return rs;
  };

  if (flat) {
    RoundStat rs = run_round(0, 0);
    if (std::isnan(p_box))
      rs.p_analytic = std::numeric_limits<double>::quiet_NaN();
    else if (c.protocol == ProtocolKind::majority)
      rs.p_analytic = equality_success_3box(p_box);
    else
      rs.p_analytic = c.bipartite ? equality_success_bipartite(p_box, c.n)
                                  : equality_success_3box(p_box);
    stats.trials = rs.trials;
    stats.successes = rs.successes;
    stats.p_empirical = rs.p_empirical;
    stats.std_err = rs.std_err;
    stats.p_analytic = rs.p_analytic;
    return stats;
  }

  // Boost curves: analytic trajectory alongside per-round Monte Carlo.
  const double q_maj = std::isnan(p_box) ? p_box : equality_success_3box(p_box);
  double p_analytic = c.protocol == ProtocolKind::boost
                          ? c.p0
                          : 0.5 + std::ldexp(1.0, -(c.n * c.bits_per_party + 1));
  for (int round = 0; round <= c.rounds; ++round) {
    RoundStat rs = run_round(round, static_cast<std::uint64_t>(round) << 40);
    rs.p_analytic = p_analytic;
    stats.curve.push_back(rs);
    p_analytic = boost_map(p_analytic, q_maj);  // NaN q propagates: no closed form
  }
  const RoundStat& last = stats.curve.back();
  stats.trials = last.trials;
  stats.successes = last.successes;
  stats.p_empirical = last.p_empirical;
  stats.std_err = last.std_err;
  stats.p_analytic = last.p_analytic;
  return stats;
}

std::string stats_to_json(const TrialStats& s, const ScenarioConfig& c, int indent) {
  nlohmann::ordered_json j;
  j["scenario"] = nlohmann::ordered_json::parse(scenario_to_json(c));
  j["trials"] = s.trials;
  j["successes"] = s.successes;
  j["p_empirical"] = s.p_empirical;
  j["std_err"] = s.std_err;
  if (std::isnan(s.p_analytic))
    j["p_analytic"] = nullptr;
  else
    j["p_analytic"] = s.p_analytic;
  j["seed"] = s.seed;
  j["audit_passed"] = s.audit_passed;
  j["gather_bits"] = s.gather_bits;
  if (!s.curve.empty()) {
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : s.curve) {
      nlohmann::ordered_json row;
      row["round"] = r.round;
      row["trials"] = r.trials;
      row["successes"] = r.successes;
      row["p_empirical"] = r.p_empirical;
      if (std::isnan(r.p_analytic))
        row["p_analytic"] = nullptr;
      else
        row["p_analytic"] = r.p_analytic;
      row["std_err"] = r.std_err;
      rows.push_back(std::move(row));
    }
    j["curve"] = std::move(rows);
  }
  return indent < 0 ? j.dump() : j.dump(indent);
}

std::string curve_to_csv(const TrialStats& s) {
  std::ostringstream out;
  out << "round,p_empirical,p_analytic,stderr\n";
  out.precision(12);
  if (s.curve.empty()) {
    out << 0 << "," << s.p_empirical << "," << s.p_analytic << "," << s.std_err << "\n";
    return out.str();
  }
  for (const auto& r : s.curve)
    out << r.round << "," << r.p_empirical << "," << r.p_analytic << "," << r.std_err << "\n";
  return out.str();
}

}  // namespace nlbox
