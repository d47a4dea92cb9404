// Exercises the shared-library surface exactly as a foreign client would:
// opaque handles, status codes, JSON strings.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlbox/nlbox.h"

namespace {

struct CString {
  char* ptr = nullptr;
  ~CString() { nlbox_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

}  // namespace

TEST_CASE("version and error reporting") {
  CHECK(std::strlen(nlbox_version()) > 0);
  nlbox_expr* e = nullptr;
  CHECK(nlbox_expr_klyshko(1, &e) == NLBOX_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(nlbox_last_error()) > 0);
  CHECK(nlbox_expr_klyshko(17, &e) == NLBOX_ERR_TOO_LARGE);
  CHECK(nlbox_expr_klyshko(2, nullptr) == NLBOX_ERR_INVALID_ARGUMENT);
}

TEST_CASE("expression construction, unit form, JSON round trip") {
  nlbox_expr* s3 = nullptr;
  REQUIRE(nlbox_expr_svetlichny(3, &s3) == NLBOX_OK);
  int n = 0;
  size_t terms = 0;
  CHECK(nlbox_expr_party_count(s3, &n) == NLBOX_OK);
  CHECK(n == 3);
  CHECK(nlbox_expr_term_count(s3, &terms) == NLBOX_OK);
  CHECK(terms == 8);

  nlbox_expr* unit = nullptr;
  int64_t num = 0;
  uint32_t exp = 0;
  REQUIRE(nlbox_expr_unit_form(s3, &unit, &num, &exp) == NLBOX_OK);
  CHECK(num == 1);
  CHECK(exp == 1);

  double w = 0.0;
  CHECK(nlbox_expr_algebraic_max(unit, &w) == NLBOX_OK);
  CHECK(w == 8.0);

  CString json;
  REQUIRE(nlbox_expr_to_json(unit, &json.ptr) == NLBOX_OK);
  const auto parsed = nlohmann::json::parse(json.str());
  CHECK(parsed["n"] == 3);
  CHECK(parsed["terms"].size() == 8);
  CHECK(parsed["terms"][0]["setting"] == "xxx");

  nlbox_expr* back = nullptr;
  REQUIRE(nlbox_expr_from_json(json.ptr, &back) == NLBOX_OK);
  CString json2;
  REQUIRE(nlbox_expr_to_json(back, &json2.ptr) == NLBOX_OK);
  CHECK(json.str() == json2.str());

  // evaluate with the coefficient signs gives the algebraic maximum.
  std::vector<double> corr(8, 0.0);
  for (const auto& t : parsed["terms"]) {
    uint32_t mask = 0;
    const std::string setting = t["setting"].get<std::string>();
    for (size_t i = 0; i < setting.size(); ++i)
      if (setting[i] == 'y') mask |= 1u << i;
    corr[mask] = t["num"].get<double>();
  }
  double v = 0.0;
  CHECK(nlbox_expr_evaluate(unit, corr.data(), corr.size(), &v) == NLBOX_OK);
  CHECK(v == 8.0);
  CHECK(nlbox_expr_evaluate(unit, corr.data(), 4, &v) == NLBOX_ERR_MISSING_SETTING);

  nlbox_expr* prime = nullptr;
  REQUIRE(nlbox_expr_prime(unit, &prime) == NLBOX_OK);
  nlbox_expr* prime2 = nullptr;
  REQUIRE(nlbox_expr_prime(prime, &prime2) == NLBOX_OK);
  CString j3;
  REQUIRE(nlbox_expr_to_json(prime2, &j3.ptr) == NLBOX_OK);
  CHECK(j3.str() == json.str());

  // Unknown keys (e.g. the CLI's meta header) are ignored on input.
  const std::string wrapped = std::string("{\"meta\":{\"version\":\"x\",\"seed\":0},") + json.str().substr(1);
  nlbox_expr* from_wrapped = nullptr;
  REQUIRE(nlbox_expr_from_json(wrapped.c_str(), &from_wrapped) == NLBOX_OK);
  CString j4;
  REQUIRE(nlbox_expr_to_json(from_wrapped, &j4.ptr) == NLBOX_OK);
  CHECK(j4.str() == json.str());
  nlbox_expr_free(from_wrapped);

  nlbox_expr_free(s3);
  nlbox_expr_free(unit);
  nlbox_expr_free(back);
  nlbox_expr_free(prime);
  nlbox_expr_free(prime2);

  CHECK(nlbox_expr_from_json("{", &back) == NLBOX_ERR_INVALID_ARGUMENT);
}

TEST_CASE("polynomials, mappings, boxes") {
  nlbox_poly* poly = nullptr;
  REQUIRE(nlbox_poly_svetlichny(3, &poly) == NLBOX_OK);
  int bit = -1;
  CHECK(nlbox_poly_target(poly, 0b111, &bit) == NLBOX_OK);
  CHECK(bit == 1);
  CHECK(nlbox_poly_target(poly, 0b011, &bit) == NLBOX_OK);
  CHECK(bit == 1);
  CHECK(nlbox_poly_target(poly, 0b001, &bit) == NLBOX_OK);
  CHECK(bit == 0);
  CHECK(nlbox_poly_target(poly, 8, &bit) == NLBOX_ERR_OUT_OF_RANGE);

  nlbox_expr* s3 = nullptr;
  REQUIRE(nlbox_expr_svetlichny(3, &s3) == NLBOX_OK);
  nlbox_expr* unit = nullptr;
  REQUIRE(nlbox_expr_unit_form(s3, &unit, nullptr, nullptr) == NLBOX_OK);
  int found = 0, iswap = -1, oswap = -1;
  REQUIRE(nlbox_poly_find_mapping(poly, unit, &found, &iswap, &oswap) == NLBOX_OK);
  CHECK(found == 1);
  CHECK(iswap == 0);
  CHECK(oswap == 0);

  nlbox_expr* mapped = nullptr;
  REQUIRE(nlbox_poly_to_bell(poly, iswap, oswap, &mapped) == NLBOX_OK);
  CString a, b;
  REQUIRE(nlbox_expr_to_json(mapped, &a.ptr) == NLBOX_OK);
  REQUIRE(nlbox_expr_to_json(unit, &b.ptr) == NLBOX_OK);
  CHECK(a.str() == b.str());

  nlbox_box* box = nullptr;
  REQUIRE(nlbox_box_canonical(unit, &box) == NLBOX_OK);
  int pass = 0;
  CString report;
  REQUIRE(nlbox_box_verify_nonsignaling(box, &pass, &report.ptr) == NLBOX_OK);
  CHECK(pass == 1);
  double success = 0.0;
  REQUIRE(nlbox_box_success_probability(box, poly, &success) == NLBOX_OK);
  CHECK(success == 1.0);

  // Sampling is reproducible and the counter advances.
  uint64_t counter = 0;
  uint32_t out1 = 0, out2 = 0;
  REQUIRE(nlbox_box_sample(box, 0b101, 42, 7, &counter, &out1) == NLBOX_OK);
  CHECK(counter == 1);
  uint64_t counter_again = 0;
  REQUIRE(nlbox_box_sample(box, 0b101, 42, 7, &counter_again, &out2) == NLBOX_OK);
  CHECK(out1 == out2);

  nlbox_box* noisy = nullptr;
  REQUIRE(nlbox_box_noisy(poly, 937, 1000, &noisy) == NLBOX_OK);
  REQUIRE(nlbox_box_success_probability(noisy, poly, &success) == NLBOX_OK);
  CHECK(success == doctest::Approx(0.937).epsilon(1e-15));
  CString box_json;
  REQUIRE(nlbox_box_to_json(noisy, &box_json.ptr) == NLBOX_OK);
  nlbox_box* box_back = nullptr;
  REQUIRE(nlbox_box_from_json(box_json.ptr, &box_back) == NLBOX_OK);
  double p000 = -1.0, p000b = -2.0;
  REQUIRE(nlbox_box_prob(noisy, 0, 0, &p000) == NLBOX_OK);
  REQUIRE(nlbox_box_prob(box_back, 0, 0, &p000b) == NLBOX_OK);
  CHECK(p000 == p000b);

  CHECK(nlbox_box_noisy(poly, 1, 4, &noisy) == NLBOX_ERR_OUT_OF_RANGE);

  nlbox_box_free(box_back);
  nlbox_box_free(noisy);
  nlbox_box_free(box);
  nlbox_expr_free(mapped);
  nlbox_expr_free(unit);
  nlbox_expr_free(s3);
  nlbox_poly_free(poly);
}

TEST_CASE("bounds through the C surface") {
  nlbox_expr* e = nullptr;
  REQUIRE(nlbox_expr_svetlichny(3, &e) == NLBOX_OK);
  double lhv = 0.0, hybrid = 0.0, ghz = 0.0, weight = 0.0, prob = 0.0;
  uint32_t bits = 0, block = 0;
  CHECK(nlbox_lhv_max(e, &lhv, &bits) == NLBOX_OK);
  CHECK(lhv == 2.0);
  CHECK(nlbox_hybrid_max(e, &hybrid, &block) == NLBOX_OK);
  CHECK(hybrid == 2.0);
  CHECK((block & 1u) == 1u);
  std::vector<double> angles(6);
  CHECK(nlbox_ghz_max(e, 16, 4, 1, &ghz, angles.data()) == NLBOX_OK);
  CHECK(ghz == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-8));
  CHECK(nlbox_expr_algebraic_max(e, &weight) == NLBOX_OK);
  CHECK(nlbox_sim_probability(ghz, weight, &prob) == NLBOX_OK);
  CHECK(prob == doctest::Approx(0.853553).epsilon(1e-5));
  CHECK(nlbox_sim_probability(5.0, 4.0, &prob) == NLBOX_ERR_OUT_OF_RANGE);
  nlbox_expr_free(e);

  CString report;
  REQUIRE(nlbox_bound_report_json(3, 4, 1, &report.ptr) == NLBOX_OK);
  const auto j = nlohmann::json::parse(report.str());
  CHECK(j["lhv"]["value_exact"] == "2");
  CHECK(j["hybrid"]["value_exact"] == "2");
  CHECK(j["algebraic"]["value_exact"] == "4");
  CHECK(j["simulation_probability"]["lhv_exact"] == "3/4");
}

TEST_CASE("protocol surface: thresholds, boosting, scenario runs") {
  double p2 = 0.0, p3 = 0.0;
  REQUIRE(nlbox_thresholds(&p2, &p3) == NLBOX_OK);
  CHECK(p2 == doctest::Approx(0.908248).epsilon(1e-6));
  CHECK(p3 == doctest::Approx(0.9368).epsilon(1e-3));

  double s = 0.0;
  CHECK(nlbox_fixed_point_s(0.9, &s) == NLBOX_OK);
  double mapped = 0.0;
  CHECK(nlbox_boost_map(s, 0.9, &mapped) == NLBOX_OK);
  CHECK(mapped == doctest::Approx(s).epsilon(1e-12));
  CHECK(nlbox_fixed_point_s(0.8, &s) == NLBOX_ERR_Q_TOO_SMALL);

  const char* scenario =
      R"({"protocol":"equality","n":3,"box":{"kind":"noisy","p":0.9},"trials":5000,"seed":3})";
  CString stats, csv;
  REQUIRE(nlbox_protocol_run(scenario, &stats.ptr, &csv.ptr) == NLBOX_OK);
  const auto j = nlohmann::json::parse(stats.str());
  CHECK(j["trials"] == 5000);
  CHECK(j["audit_passed"] == true);
  const double expect = 0.9 * 0.9 * 0.9 + 3.0 * 0.9 * 0.1 * 0.1;
  CHECK(j["p_analytic"].get<double>() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(std::abs(j["p_empirical"].get<double>() - expect) <
        3.5 * j["std_err"].get<double>());

  CString stats2;
  REQUIRE(nlbox_protocol_run(scenario, &stats2.ptr, nullptr) == NLBOX_OK);
  CHECK(stats.str() == stats2.str());

  CHECK(nlbox_protocol_run(R"({"protocol":"bogus"})", &stats.ptr, nullptr) == NLBOX_ERR_BAD_CONFIG);
}

TEST_CASE("verify suite, including the injected fault") {
  int pass = 0;
  CString report;
  REQUIRE(nlbox_box_verify_suite(5, 0, &pass, &report.ptr) == NLBOX_OK);
  CHECK(pass == 1);
  const auto j = nlohmann::json::parse(report.str());
  CHECK(j["pass"] == true);
  for (const auto& c : j["checks"]) CHECK(c["pass"] == true);

  CString fault_report;
  int fault_pass = 1;
  REQUIRE(nlbox_box_verify_suite(3, 1, &fault_pass, &fault_report.ptr) == NLBOX_OK);
  CHECK(fault_pass == 0);
  const auto jf = nlohmann::json::parse(fault_report.str());
  CHECK(jf["pass"] == false);
  bool named = false;
  for (const auto& c : jf["checks"])
    if (c["check"] == "non_signaling" && c["pass"] == false &&
        !c["failing_subset"].get<std::string>().empty())
      named = true;
  CHECK(named);

  CHECK(nlbox_box_verify_suite(9, 0, &pass, nullptr) == NLBOX_ERR_INVALID_ARGUMENT);
}
