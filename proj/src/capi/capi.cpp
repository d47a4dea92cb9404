// C API of the shared library: opaque handles over the core types, exceptions
// mapped to status codes, strings passed out as malloc'd buffers.

#include "nlbox/nlbox.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <json.hpp>

#include "core/bell.hpp"
#include "core/bounds.hpp"
#include "core/boxes.hpp"
#include "core/errors.hpp"
#include "core/protocol.hpp"

using namespace nlbox;

struct nlbox_expr {
  BellExpression impl;
};
struct nlbox_poly {
  BoxPolynomial impl;
};
struct nlbox_box {
  BoxBehavior impl;
};

namespace {

thread_local std::string g_last_error;

nlbox_status status_from(errc code) {
  switch (code) {
    case errc::invalid_argument: return NLBOX_ERR_INVALID_ARGUMENT;
    case errc::too_large: return NLBOX_ERR_TOO_LARGE;
    case errc::unequal_magnitudes: return NLBOX_ERR_UNEQUAL_MAGNITUDES;
    case errc::missing_setting: return NLBOX_ERR_MISSING_SETTING;
    case errc::non_unit_expression: return NLBOX_ERR_NON_UNIT_EXPRESSION;
    case errc::dimension_mismatch: return NLBOX_ERR_DIMENSION_MISMATCH;
    case errc::out_of_range: return NLBOX_ERR_OUT_OF_RANGE;
    case errc::q_too_small: return NLBOX_ERR_Q_TOO_SMALL;
    case errc::bad_config: return NLBOX_ERR_BAD_CONFIG;
    case errc::arithmetic_overflow: return NLBOX_ERR_OVERFLOW;
    case errc::internal: return NLBOX_ERR_INTERNAL;
  }
  return NLBOX_ERR_INTERNAL;
}

template <class Fn>
nlbox_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NLBOX_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NLBOX_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NLBOX_ERR_INTERNAL;
  }
}

nlbox_status require(bool ok, const char* what) {
  if (ok) return NLBOX_OK;
  g_last_error = what;
  return NLBOX_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* nlbox_version(void) { return "0.1.0"; }

const char* nlbox_last_error(void) { return g_last_error.c_str(); }

void nlbox_string_free(char* s) { std::free(s); }

/* ===== Bell expressions ===== */

nlbox_status nlbox_expr_klyshko(int n, nlbox_expr** out) {
  if (auto s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] { *out = new nlbox_expr{klyshko(n)}; });
}

nlbox_status nlbox_expr_svetlichny(int n, nlbox_expr** out) {
  if (auto s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] { *out = new nlbox_expr{svetlichny(n)}; });
}

nlbox_status nlbox_expr_prime(const nlbox_expr* e, nlbox_expr** out) {
  if (auto s = require(e != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new nlbox_expr{prime(e->impl)}; });
}

nlbox_status nlbox_expr_unit_form(const nlbox_expr* e, nlbox_expr** unit, int64_t* scale_num,
                                  uint32_t* scale_exp) {
  if (auto s = require(e != nullptr && unit != nullptr, "null argument")) return s;
  return guarded([&] {
    UnitForm u = unit_form(e->impl);
    *unit = new nlbox_expr{std::move(u.unit)};
    if (scale_num != nullptr) *scale_num = u.scale.num;
    if (scale_exp != nullptr) *scale_exp = u.scale.exp;
  });
}

nlbox_status nlbox_expr_party_count(const nlbox_expr* e, int* out) {
  if (auto s = require(e != nullptr && out != nullptr, "null argument")) return s;
  *out = e->impl.n;
  return NLBOX_OK;
}

nlbox_status nlbox_expr_term_count(const nlbox_expr* e, size_t* out) {
  if (auto s = require(e != nullptr && out != nullptr, "null argument")) return s;
  *out = e->impl.term_count();
  return NLBOX_OK;
}

nlbox_status nlbox_expr_algebraic_max(const nlbox_expr* e, double* out) {
  if (auto s = require(e != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = algebraic_max(e->impl).to_double(); });
}

nlbox_status nlbox_expr_evaluate(const nlbox_expr* e, const double* correlations, size_t len,
                                 double* out) {
  if (auto s = require(e != nullptr && correlations != nullptr && out != nullptr, "null argument"))
    return s;
  return guarded([&] {
    if (len != (std::size_t{1} << e->impl.n))
      fail(errc::missing_setting, "correlation array must have 2^n entries");
    CorrelationAssignment c;
    for (std::size_t s = 0; s < len; ++s) c[static_cast<SettingMask>(s)] = correlations[s];
    *out = evaluate(e->impl, c);
  });
}

nlbox_status nlbox_expr_to_json(const nlbox_expr* e, char** json) {
  if (auto s = require(e != nullptr && json != nullptr, "null argument")) return s;
  return guarded([&] { *json = dup_string(expression_to_json(e->impl)); });
}

nlbox_status nlbox_expr_from_json(const char* json, nlbox_expr** out) {
  if (auto s = require(json != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new nlbox_expr{expression_from_json(json)}; });
}

void nlbox_expr_free(nlbox_expr* e) { delete e; }

/* ===== box polynomials ===== */

nlbox_status nlbox_poly_svetlichny(int n, nlbox_poly** out) {
  if (auto s = require(out != nullptr, "null output pointer")) return s;
  return guarded([&] { *out = new nlbox_poly{svetlichny_box(n)}; });
}

nlbox_status nlbox_poly_party_count(const nlbox_poly* p, int* out) {
  if (auto s = require(p != nullptr && out != nullptr, "null argument")) return s;
  *out = p->impl.n;
  return NLBOX_OK;
}

nlbox_status nlbox_poly_target(const nlbox_poly* p, uint32_t inputs, int* bit) {
  if (auto s = require(p != nullptr && bit != nullptr, "null argument")) return s;
  return guarded([&] {
    if (inputs >= p->impl.target.size()) fail(errc::out_of_range, "input mask out of range");
    *bit = p->impl.value(inputs);
  });
}

nlbox_status nlbox_poly_to_bell(const nlbox_poly* p, int input_swap, int output_swap,
                                nlbox_expr** out) {
  if (auto s = require(p != nullptr && out != nullptr, "null argument")) return s;
  return guarded(
      [&] { *out = new nlbox_expr{box_to_bell(p->impl, BoxMapping{input_swap != 0, output_swap != 0})}; });
}

nlbox_status nlbox_poly_find_mapping(const nlbox_poly* p, const nlbox_expr* e, int* found,
                                     int* input_swap, int* output_swap) {
  if (auto s = require(p != nullptr && e != nullptr && found != nullptr, "null argument")) return s;
  return guarded([&] {
    const auto m = find_mapping(p->impl, e->impl);
    *found = m.has_value() ? 1 : 0;
    if (m.has_value()) {
      if (input_swap != nullptr) *input_swap = m->input_swap ? 1 : 0;
      if (output_swap != nullptr) *output_swap = m->output_swap ? 1 : 0;
    }
  });
}

void nlbox_poly_free(nlbox_poly* p) { delete p; }

/* ===== box behaviors ===== */

nlbox_status nlbox_box_canonical(const nlbox_expr* unit_expr, nlbox_box** out) {
  if (auto s = require(unit_expr != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new nlbox_box{canonical_distribution(unit_expr->impl)}; });
}

nlbox_status nlbox_box_perfect(const nlbox_poly* p, nlbox_box** out) {
  if (auto s = require(p != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new nlbox_box{perfect_box(p->impl)}; });
}

nlbox_status nlbox_box_noisy(const nlbox_poly* p, int64_t p_num, int64_t p_den, nlbox_box** out) {
  if (auto s = require(p != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new nlbox_box{noisy_box(p->impl, Rat64(p_num, p_den))}; });
}

nlbox_status nlbox_box_lhv(int n, const int8_t* signs, nlbox_box** out) {
  if (auto s = require(signs != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] {
    if (n < 1 || n > kPartyCap) fail(errc::invalid_argument, "party count out of range");
    DeterministicStrategy strat;
    strat.signs.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int b = 0; b < 2; ++b) {
        const int v = signs[2 * i + b];
        if (v != 1 && v != -1) fail(errc::invalid_argument, "signs must be +/-1");
        strat.signs[static_cast<std::size_t>(i)][b] = v;
      }
    }
    *out = new nlbox_box{lhv_strategy_box(strat)};
  });
}

nlbox_status nlbox_box_ghz(int n, const double* angles, nlbox_box** out) {
  if (auto s = require(angles != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] {
    if (n < 1 || n > kPartyCap) fail(errc::invalid_argument, "party count out of range");
    *out = new nlbox_box{ghz_box(GhzStrategy::from_flat(angles, n))};
  });
}

nlbox_status nlbox_box_party_count(const nlbox_box* b, int* out) {
  if (auto s = require(b != nullptr && out != nullptr, "null argument")) return s;
  *out = b->impl.n;
  return NLBOX_OK;
}

nlbox_status nlbox_box_prob(const nlbox_box* b, uint32_t inputs, uint32_t outputs, double* out) {
  if (auto s = require(b != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] {
    if (inputs >= b->impl.size() || outputs >= b->impl.size())
      fail(errc::out_of_range, "mask out of range");
    *out = b->impl.prob(inputs, outputs);
  });
}

nlbox_status nlbox_box_verify_nonsignaling(const nlbox_box* b, int* pass, char** report_json) {
  if (auto s = require(b != nullptr && pass != nullptr, "null argument")) return s;
  return guarded([&] {
    const NonsignalingReport r = verify_nonsignaling(b->impl);
    *pass = r.pass ? 1 : 0;
    if (report_json != nullptr) {
      nlohmann::ordered_json j;
      j["pass"] = r.pass;
      j["subsets_checked"] = r.subsets_checked;
      auto vio = nlohmann::ordered_json::array();
      for (const auto& v : r.violations) {
        std::vector<int> parties;
        for (int i = 0; i < b->impl.n; ++i)
          if (v.subset & (1u << i)) parties.push_back(i + 1);
        vio.push_back({{"kind", v.kind},
                       {"parties", parties},
                       {"input_a", v.input_a},
                       {"input_b", v.input_b},
                       {"deviation", v.deviation}});
      }
      j["violations"] = std::move(vio);
      *report_json = dup_string(j.dump());
    }
  });
}

nlbox_status nlbox_box_success_probability(const nlbox_box* b, const nlbox_poly* p, double* out) {
  if (auto s = require(b != nullptr && p != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = success_probability(b->impl, p->impl); });
}

nlbox_status nlbox_box_sample(const nlbox_box* b, uint32_t inputs, uint64_t seed, uint64_t stream,
                              uint64_t* counter, uint32_t* outputs) {
  if (auto s = require(b != nullptr && counter != nullptr && outputs != nullptr, "null argument"))
    return s;
  return guarded([&] {
    RngStream rng(seed, stream);
    rng.counter = *counter;
    *outputs = sample(b->impl, inputs, rng);
    *counter = rng.counter;
  });
}

nlbox_status nlbox_box_to_json(const nlbox_box* b, char** json) {
  if (auto s = require(b != nullptr && json != nullptr, "null argument")) return s;
  return guarded([&] { *json = dup_string(box_to_json(b->impl)); });
}

nlbox_status nlbox_box_from_json(const char* json, nlbox_box** out) {
  if (auto s = require(json != nullptr && out != nullptr, "null argument")) return s;
  return guarded([&] { *out = new nlbox_box{box_from_json(json)}; });
}

void nlbox_box_free(nlbox_box* b) { delete b; }

/* ===== bounds ===== */

nlbox_status nlbox_lhv_max(const nlbox_expr* e, double* value, uint32_t* strategy_bits) {
  if (auto s = require(e != nullptr && value != nullptr, "null argument")) return s;
  return guarded([&] {
    const LhvResult r = lhv_max(e->impl);
    *value = r.value.to_double();
    if (strategy_bits != nullptr) *strategy_bits = r.strategy.to_bits();
  });
}

nlbox_status nlbox_hybrid_max(const nlbox_expr* e, double* value, uint32_t* block_mask) {
  if (auto s = require(e != nullptr && value != nullptr, "null argument")) return s;
  return guarded([&] {
    const HybridResult r = hybrid_max(e->impl);
    *value = r.value.to_double();
    if (block_mask != nullptr) *block_mask = r.partition.block_a;
  });
}

nlbox_status nlbox_ghz_max(const nlbox_expr* e, int multistarts, uint64_t seed, int threads,
                           double* value, double* angles_out) {
  if (auto s = require(e != nullptr && value != nullptr, "null argument")) return s;
  return guarded([&] {
    GhzConfig cfg;
    if (multistarts > 0) cfg.multistarts = multistarts;
    cfg.seed = seed;
    cfg.threads = threads;
    const GhzResult r = ghz_max(e->impl, cfg);
    *value = r.value;
    if (angles_out != nullptr)
      for (int i = 0; i < e->impl.n; ++i) {
        angles_out[2 * i] = r.strategy.angle(i, 0);
        angles_out[2 * i + 1] = r.strategy.angle(i, 1);
      }
  });
}

nlbox_status nlbox_sim_probability(double value, double total_weight, double* out) {
  if (auto s = require(out != nullptr, "null argument")) return s;
  return guarded([&] { *out = sim_probability(value, total_weight); });
}

nlbox_status nlbox_bound_report_json(int n, uint64_t seed, int threads, char** json) {
  if (auto s = require(json != nullptr, "null argument")) return s;
  return guarded([&] {
    GhzConfig cfg;
    cfg.seed = seed;
    cfg.threads = threads;
    *json = dup_string(bound_report_to_json(bound_report(n, cfg)));
  });
}

/* ===== protocols ===== */

nlbox_status nlbox_thresholds(double* p2, double* p3) {
  if (auto s = require(p2 != nullptr && p3 != nullptr, "null argument")) return s;
  const Thresholds t = thresholds();
  *p2 = t.p2_closed;
  *p3 = t.p3;
  return NLBOX_OK;
}

nlbox_status nlbox_fixed_point_s(double q_maj, double* s) {
  if (auto st = require(s != nullptr, "null argument")) return st;
  return guarded([&] { *s = fixed_point_s(q_maj); });
}

nlbox_status nlbox_boost_map(double p, double q_maj, double* out) {
  if (auto s = require(out != nullptr, "null argument")) return s;
  *out = boost_map(p, q_maj);
  return NLBOX_OK;
}

nlbox_status nlbox_protocol_run(const char* scenario_json, char** stats_json, char** curve_csv) {
  if (auto s = require(scenario_json != nullptr && stats_json != nullptr, "null argument")) return s;
  return guarded([&] {
    const ScenarioConfig cfg = scenario_from_json(scenario_json);
    const TrialStats stats = run_trials(cfg);
    *stats_json = dup_string(stats_to_json(stats, cfg));
    if (curve_csv != nullptr) *curve_csv = dup_string(curve_to_csv(stats));
  });
}

/* ===== bundled verification suite ===== */

nlbox_status nlbox_box_verify_suite(int n, int inject_fault, int* pass, char** report_json) {
  if (auto s = require(pass != nullptr, "null argument")) return s;
  return guarded([&] {
    if (n < 2 || n > 8) fail(errc::invalid_argument, "verify suite supports 2 <= n <= 8");
    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    bool all_ok = true;

    const BoxPolynomial poly = svetlichny_box(n);
    const UnitForm unit = unit_form(svetlichny(n));
    BoxBehavior behavior = canonical_distribution(unit.unit);
    if (inject_fault != 0 && n >= 2) {
      // Make party 1's marginal depend on party 2's input: overwrite one row
      // with a deterministic all-zero output.
      const InputMask z = InputMask{1} << 1;
      std::fill(behavior.rows_exact[z].begin(), behavior.rows_exact[z].end(), Rat64(0));
      behavior.rows_exact[z][0] = Rat64(1);
    }

    // Row normalization + non-signaling over every proper subset.
    const NonsignalingReport ns = verify_nonsignaling(behavior);
    bool rows_ok = true;
    for (const auto& v : ns.violations)
      if (v.kind == "row_sum") rows_ok = false;
    checks.push_back({{"check", "normalization"}, {"pass", rows_ok}});
    std::string subset_note;
    for (const auto& v : ns.violations) {
      if (v.kind != "marginal") continue;
      subset_note = "parties {";
      bool first = true;
      for (int i = 0; i < n; ++i)
        if (v.subset & (1u << i)) {
          subset_note += (first ? "" : ",") + std::to_string(i + 1);
          first = false;
        }
      subset_note += "}";
      break;
    }
    checks.push_back({{"check", "non_signaling"},
                      {"pass", ns.pass && rows_ok},
                      {"subsets_checked", ns.subsets_checked},
                      {"failing_subset", subset_note}});
    all_ok = all_ok && ns.pass;

    // Sign rule: pairwise-AND parity == parity of q(q-1)/2.
    bool sign_ok = true;
    for (InputMask z = 0; z < (InputMask{1} << n); ++z) {
      const int q = __builtin_popcount(z);
      if (poly.value(z) != ((q * (q - 1) / 2) & 1)) sign_ok = false;
    }
    checks.push_back({{"check", "sign_rule"}, {"pass", sign_ok}});
    all_ok = all_ok && sign_ok;

    // Mapping existence against the unit Svetlichny expression.
    const auto mapping = find_mapping(poly, unit.unit);
    checks.push_back({{"check", "mapping_to_svetlichny"},
                      {"pass", mapping.has_value()},
                      {"input_swap", mapping.has_value() ? mapping->input_swap : false},
                      {"output_swap", mapping.has_value() ? mapping->output_swap : false}});
    all_ok = all_ok && mapping.has_value();

    if (n == 2) {
      // PR-box equivalence: outputs uniform, XOR = AND of inputs.
      bool pr_ok = true;
      for (InputMask z = 0; z < 4; ++z)
        for (OutputMask o = 0; o < 4; ++o) {
          const bool want = (__builtin_popcount(o) & 1) == ((z == 3) ? 1 : 0);
          const Rat64 expect = want ? Rat64(1, 2) : Rat64(0);
          if (!(behavior.prob_exact(z, o) == expect)) pr_ok = false;
        }
      checks.push_back({{"check", "pr_box_equivalence"}, {"pass", pr_ok}});
      all_ok = all_ok && pr_ok;
    }

    *pass = all_ok ? 1 : 0;
    if (report_json != nullptr) {
      nlohmann::ordered_json j;
      j["n"] = n;
      j["pass"] = all_ok;
      j["checks"] = std::move(checks);
      *report_json = dup_string(j.dump());
    }
  });
}

}  // extern "C"
