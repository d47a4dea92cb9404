/*
 * nlbox — multipartite nonlocal boxes, generalized Bell-Svetlichny
 * inequalities, bound certification, and distributed communication-complexity
 * protocol simulation.
 *
 * C API of the shared library. All domain objects are opaque handles; every
 * function returns an nlbox_status, with NLBOX_OK == 0 on success. On
 * failure, nlbox_last_error() returns a thread-local description of the most
 * recent error. Strings returned through char** are heap-allocated and must
 * be released with nlbox_string_free().
 *
 * Conventions (shared with the JSON formats):
 *   - Parties are 0-indexed in masks: bit i of a setting/input/output mask
 *     belongs to party i.
 *   - Setting masks: bit 0 = observable "x", bit 1 = "y".
 *   - Output masks: bit 1 = the "-1" outcome.
 *   - Strategy bits: bit 2i = party i's x-outcome (1 -> -1), bit 2i+1 = y.
 *   - Angle arrays have length 2n: theta[2i], theta[2i+1] are party i's
 *     measurement angles for inputs/observables 0 and 1.
 */

#ifndef NLBOX_H
#define NLBOX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define NLBOX_API __declspec(dllexport)
#else
#define NLBOX_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nlbox_status {
  NLBOX_OK = 0,
  NLBOX_ERR_INVALID_ARGUMENT = 1,
  NLBOX_ERR_TOO_LARGE = 2,
  NLBOX_ERR_UNEQUAL_MAGNITUDES = 3,
  NLBOX_ERR_MISSING_SETTING = 4,
  NLBOX_ERR_NON_UNIT_EXPRESSION = 5,
  NLBOX_ERR_DIMENSION_MISMATCH = 6,
  NLBOX_ERR_OUT_OF_RANGE = 7,
  NLBOX_ERR_Q_TOO_SMALL = 8,
  NLBOX_ERR_BAD_CONFIG = 9,
  NLBOX_ERR_OVERFLOW = 10,
  NLBOX_ERR_INTERNAL = 11
} nlbox_status;

typedef struct nlbox_expr nlbox_expr;  /* Bell expression (exact dyadic coefficients) */
typedef struct nlbox_poly nlbox_poly;  /* box target parity function */
typedef struct nlbox_box nlbox_box;    /* conditional output distribution */

NLBOX_API const char* nlbox_version(void);
NLBOX_API const char* nlbox_last_error(void);
NLBOX_API void nlbox_string_free(char* s);

/* ===== Bell expressions ===== */

NLBOX_API nlbox_status nlbox_expr_klyshko(int n, nlbox_expr** out);
NLBOX_API nlbox_status nlbox_expr_svetlichny(int n, nlbox_expr** out);
NLBOX_API nlbox_status nlbox_expr_prime(const nlbox_expr* e, nlbox_expr** out);
/* Rescales an equal-magnitude expression to +/-1 coefficients; the removed
 * scale is the dyadic scale_num / 2^scale_exp. */
NLBOX_API nlbox_status nlbox_expr_unit_form(const nlbox_expr* e, nlbox_expr** unit,
                                            int64_t* scale_num, uint32_t* scale_exp);
NLBOX_API nlbox_status nlbox_expr_party_count(const nlbox_expr* e, int* out);
NLBOX_API nlbox_status nlbox_expr_term_count(const nlbox_expr* e, size_t* out);
NLBOX_API nlbox_status nlbox_expr_algebraic_max(const nlbox_expr* e, double* out);
/* correlations: one value per setting mask, length 1 << n. */
NLBOX_API nlbox_status nlbox_expr_evaluate(const nlbox_expr* e, const double* correlations,
                                           size_t len, double* out);
NLBOX_API nlbox_status nlbox_expr_to_json(const nlbox_expr* e, char** json);
NLBOX_API nlbox_status nlbox_expr_from_json(const char* json, nlbox_expr** out);
NLBOX_API void nlbox_expr_free(nlbox_expr* e);

/* ===== box polynomials and mappings ===== */

NLBOX_API nlbox_status nlbox_poly_svetlichny(int n, nlbox_poly** out);
NLBOX_API nlbox_status nlbox_poly_party_count(const nlbox_poly* p, int* out);
NLBOX_API nlbox_status nlbox_poly_target(const nlbox_poly* p, uint32_t inputs, int* bit);
NLBOX_API nlbox_status nlbox_poly_to_bell(const nlbox_poly* p, int input_swap, int output_swap,
                                          nlbox_expr** out);
/* found = 1 and the swaps are filled when one of the four uniform mappings
 * reproduces e; found = 0 otherwise. */
NLBOX_API nlbox_status nlbox_poly_find_mapping(const nlbox_poly* p, const nlbox_expr* e, int* found,
                                               int* input_swap, int* output_swap);
NLBOX_API void nlbox_poly_free(nlbox_poly* p);

/* ===== box behaviors ===== */

NLBOX_API nlbox_status nlbox_box_canonical(const nlbox_expr* unit_expr, nlbox_box** out);
NLBOX_API nlbox_status nlbox_box_perfect(const nlbox_poly* p, nlbox_box** out);
NLBOX_API nlbox_status nlbox_box_noisy(const nlbox_poly* p, int64_t p_num, int64_t p_den,
                                       nlbox_box** out);
NLBOX_API nlbox_status nlbox_box_lhv(int n, const int8_t* signs /* 2n of +/-1 */, nlbox_box** out);
NLBOX_API nlbox_status nlbox_box_ghz(int n, const double* angles /* 2n */, nlbox_box** out);
NLBOX_API nlbox_status nlbox_box_party_count(const nlbox_box* b, int* out);
NLBOX_API nlbox_status nlbox_box_prob(const nlbox_box* b, uint32_t inputs, uint32_t outputs,
                                      double* out);
/* pass = 1 when normalization and every strict-subset marginal check holds;
 * report_json (optional) lists the violations. */
NLBOX_API nlbox_status nlbox_box_verify_nonsignaling(const nlbox_box* b, int* pass,
                                                     char** report_json);
NLBOX_API nlbox_status nlbox_box_success_probability(const nlbox_box* b, const nlbox_poly* p,
                                                     double* out);
/* Draws from row `inputs` of the table. The (seed, stream, *counter) triple
 * pins the draw; *counter is advanced so consecutive calls continue the
 * stream. */
NLBOX_API nlbox_status nlbox_box_sample(const nlbox_box* b, uint32_t inputs, uint64_t seed,
                                        uint64_t stream, uint64_t* counter, uint32_t* outputs);
NLBOX_API nlbox_status nlbox_box_to_json(const nlbox_box* b, char** json);
NLBOX_API nlbox_status nlbox_box_from_json(const char* json, nlbox_box** out);
NLBOX_API void nlbox_box_free(nlbox_box* b);

/* ===== bounds ===== */

NLBOX_API nlbox_status nlbox_lhv_max(const nlbox_expr* e, double* value, uint32_t* strategy_bits);
/* block_mask: canonical block (contains party 0) of the best bipartition. */
NLBOX_API nlbox_status nlbox_hybrid_max(const nlbox_expr* e, double* value, uint32_t* block_mask);
/* Multistart gradient ascent; angles_out (length 2n) may be NULL. threads = 0
 * uses machine parallelism; results are thread-count independent. */
NLBOX_API nlbox_status nlbox_ghz_max(const nlbox_expr* e, int multistarts, uint64_t seed,
                                     int threads, double* value, double* angles_out);
NLBOX_API nlbox_status nlbox_sim_probability(double value, double total_weight, double* out);
/* Full LHV/hybrid/quantum/algebraic report of svetlichny(n) as JSON. */
NLBOX_API nlbox_status nlbox_bound_report_json(int n, uint64_t seed, int threads, char** json);

/* ===== protocols ===== */

NLBOX_API nlbox_status nlbox_thresholds(double* p2, double* p3);
NLBOX_API nlbox_status nlbox_fixed_point_s(double q_maj, double* s);
NLBOX_API nlbox_status nlbox_boost_map(double p, double q_maj, double* out);
/* Runs a scenario described by the JSON config ({"protocol": "equality" |
 * "majority" | "boost" | "end_to_end", "n": int, "box": {"kind": ..., "p":
 * ...}, "trials": int, "seed": int, "rounds": int?, "variant":
 * "multipartite" | "bipartite"?}). stats_json receives the result;
 * curve_csv (optional) receives the per-round boosting curve. */
NLBOX_API nlbox_status nlbox_protocol_run(const char* scenario_json, char** stats_json,
                                          char** curve_csv);

/* Bundled self-check used by `nlbox box verify`: canonical-table
 * normalization, all-subset non-signaling, the pairwise-AND sign rule, and
 * existence of a mapping to the n-party Svetlichny expression. inject_fault
 * != 0 corrupts the table first (harness self-test). pass = 1 when every
 * check holds; report_json carries one entry per check. */
NLBOX_API nlbox_status nlbox_box_verify_suite(int n, int inject_fault, int* pass, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* NLBOX_H */
