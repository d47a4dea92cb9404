// nlbox command-line tool. Talks to the shared library strictly through the
// extern-C API in nlbox/nlbox.h; JSON assembly and flag parsing happen here.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nlbox/nlbox.h"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // verification or internal failure
constexpr int kExitUsage = 2;    // flag/config errors

struct CString {
  char* ptr = nullptr;
  ~CString() { nlbox_string_free(ptr); }
  std::string str() const { return ptr == nullptr ? std::string() : std::string(ptr); }
};

int exit_code_for(nlbox_status s) {
  switch (s) {
    case NLBOX_OK: return kExitOk;
    case NLBOX_ERR_INVALID_ARGUMENT:
    case NLBOX_ERR_TOO_LARGE:
    case NLBOX_ERR_OUT_OF_RANGE:
    case NLBOX_ERR_Q_TOO_SMALL:
    case NLBOX_ERR_BAD_CONFIG:
    case NLBOX_ERR_NON_UNIT_EXPRESSION: return kExitUsage;
    default: return kExitFailure;
  }
}

[[noreturn]] void die(nlbox_status s, const std::string& context) {
  std::cerr << "nlbox: " << context << ": " << nlbox_last_error() << "\n";
  std::exit(exit_code_for(s));
}

void check(nlbox_status s, const std::string& context) {
  if (s != NLBOX_OK) die(s, context);
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv("NLBOX_SEED");
  if (env == nullptr || *env == '\0') return 0;
  return std::strtoull(env, nullptr, 10);
}

ordered_json make_meta(const std::string& command, std::uint64_t seed, const ordered_json& flags) {
  ordered_json meta;
  meta["version"] = nlbox_version();
  meta["seed"] = seed;
  meta["command"] = command;
  meta["flags"] = flags;
  return meta;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) {
    std::cerr << "nlbox: cannot open " << out_path << "\n";
    std::exit(kExitFailure);
  }
  f << text << "\n";
}

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

// ===== bell =====

int cmd_bell(int n, const std::string& form, const std::string& out_path, bool pretty,
             std::uint64_t seed) {
  nlbox_expr* expr = nullptr;
  if (form == "klyshko") {
    check(nlbox_expr_klyshko(n, &expr), "klyshko");
  } else if (form == "svetlichny") {
    check(nlbox_expr_svetlichny(n, &expr), "svetlichny");
  } else if (form == "unit") {
    nlbox_expr* raw = nullptr;
    check(nlbox_expr_svetlichny(n, &raw), "svetlichny");
    check(nlbox_expr_unit_form(raw, &expr, nullptr, nullptr), "unit form");
    nlbox_expr_free(raw);
  } else {
    std::cerr << "nlbox: unknown form \"" << form << "\" (klyshko|svetlichny|unit)\n";
    return kExitUsage;
  }
  CString json;
  check(nlbox_expr_to_json(expr, &json.ptr), "serialize");
  nlbox_expr_free(expr);

  ordered_json payload = ordered_json::parse(json.str());
  ordered_json wrapped;
  wrapped["meta"] = make_meta("bell", seed, {{"n", n}, {"form", form}});
  for (auto& [k, v] : payload.items()) wrapped[k] = v;
  emit(pretty ? wrapped.dump(2) : wrapped.dump(), out_path);
  return kExitOk;
}

// ===== bounds =====

int cmd_bounds(int n, const std::string& which, bool as_json, std::uint64_t seed, int threads,
               const std::string& out_path) {
  const bool want_hybrid = which == "all" || which == "hybrid";
  if (want_hybrid && n > 7) {
    std::cerr << "nlbox: exact hybrid bound unavailable for n > 7\n";
    return kExitUsage;
  }

  if (which == "all") {
    CString json;
    check(nlbox_bound_report_json(n, seed, threads, &json.ptr), "bound report");
    ordered_json payload = ordered_json::parse(json.str());
    if (as_json) {
      ordered_json wrapped;
      wrapped["meta"] = make_meta("bounds", seed, {{"n", n}, {"which", which}, {"threads", threads}});
      for (auto& [k, v] : payload.items()) wrapped[k] = v;
      emit(wrapped.dump(2), out_path);
      return kExitOk;
    }
    std::ostringstream table;
    table << "svetlichny n=" << n << "  (seed " << seed << ")\n";
    table << "bound        value                sim. probability\n";
    const auto row = [&](const char* name, double v, double p, const std::string& note) {
      table << name;
      for (std::size_t i = std::strlen(name); i < 13; ++i) table << ' ';
      std::string vs = fmt12(v), ps = fmt12(p);
      table << vs;
      for (std::size_t i = vs.size(); i < 21; ++i) table << ' ';
      table << ps;
      if (!note.empty()) {
        for (std::size_t i = ps.size(); i < 18; ++i) table << ' ';
        table << note;
      }
      table << "\n";
    };
    row("lhv", payload["lhv"]["value"], payload["simulation_probability"]["lhv"],
        "= " + payload["lhv"]["value_exact"].get<std::string>());
    row("hybrid", payload["hybrid"]["value"], payload["simulation_probability"]["hybrid"],
        "= " + payload["hybrid"]["value_exact"].get<std::string>());
    row("quantum", payload["quantum"]["value"], payload["simulation_probability"]["quantum"],
        payload["quantum"]["note"].get<std::string>());
    row("algebraic", payload["algebraic"]["value"], 1.0,
        "= " + payload["algebraic"]["value_exact"].get<std::string>());
    emit(table.str(), out_path);
    return kExitOk;
  }

  nlbox_expr* expr = nullptr;
  check(nlbox_expr_svetlichny(n, &expr), "svetlichny");
  double weight = 0.0;
  check(nlbox_expr_algebraic_max(expr, &weight), "algebraic max");

  double value = 0.0;
  ordered_json extra;
  if (which == "lhv") {
    uint32_t bits = 0;
    check(nlbox_lhv_max(expr, &value, &bits), "lhv max");
    extra["strategy_bits"] = bits;
  } else if (which == "hybrid") {
    uint32_t block = 0;
    check(nlbox_hybrid_max(expr, &value, &block), "hybrid max");
    extra["block_mask"] = block;
  } else if (which == "ghz") {
    std::vector<double> angles(static_cast<std::size_t>(2 * n));
    check(nlbox_ghz_max(expr, 32, seed, threads, &value, angles.data()), "ghz max");
    extra["angles"] = angles;
  } else if (which == "algebraic") {
    value = weight;
  } else {
    nlbox_expr_free(expr);
    std::cerr << "nlbox: unknown bound \"" << which << "\" (all|lhv|hybrid|ghz|algebraic)\n";
    return kExitUsage;
  }
  nlbox_expr_free(expr);

  double prob = 0.0;
  check(nlbox_sim_probability(value, weight, &prob), "simulation probability");

  ordered_json j;
  j["meta"] = make_meta("bounds", seed, {{"n", n}, {"which", which}, {"threads", threads}});
  j["n"] = n;
  j["bound"] = which;
  j["value"] = value;
  j["total_weight"] = weight;
  j["simulation_probability"] = prob;
  for (auto& [k, v] : extra.items()) j[k] = v;
  if (as_json) {
    emit(j.dump(2), out_path);
  } else {
    std::ostringstream line;
    line << which << "(svetlichny n=" << n << ") = " << fmt12(value)
         << "   sim. probability = " << fmt12(prob);
    emit(line.str(), out_path);
  }
  return kExitOk;
}

// ===== box verify / table =====

int cmd_box_verify(int n, bool inject_fault, bool as_json, const std::string& out_path,
                   std::uint64_t seed) {
  int pass = 0;
  CString report;
  check(nlbox_box_verify_suite(n, inject_fault ? 1 : 0, &pass, &report.ptr), "verify suite");
  ordered_json payload = ordered_json::parse(report.str());
  if (as_json) {
    ordered_json wrapped;
    wrapped["meta"] = make_meta("box verify", seed, {{"n", n}, {"inject_fault", inject_fault}});
    for (auto& [k, v] : payload.items()) wrapped[k] = v;
    emit(wrapped.dump(2), out_path);
  } else {
    std::ostringstream out;
    out << "box verify n=" << n << "\n";
    for (const auto& c : payload["checks"]) {
      const std::string name = c["check"].get<std::string>();
      out << (c["pass"].get<bool>() ? "PASS" : "FAIL") << "  " << name;
      if (name == "non_signaling") {
        out << " (" << c["subsets_checked"].get<int>() << " subsets)";
        const std::string sub = c.value("failing_subset", std::string());
        if (!sub.empty()) out << " violating marginal on " << sub;
      }
      if (name == "mapping_to_svetlichny" && c["pass"].get<bool>())
        out << " (input_swap=" << (c["input_swap"].get<bool>() ? 1 : 0)
            << " output_swap=" << (c["output_swap"].get<bool>() ? 1 : 0) << ")";
      out << "\n";
    }
    out << (pass ? "all checks passed" : "FAILED");
    emit(out.str(), out_path);
  }
  return pass ? kExitOk : kExitFailure;
}

int cmd_box_table(int n, const std::string& kind, const std::string& p_decimal,
                  const std::vector<double>& angles, const std::vector<int>& signs,
                  const std::string& out_path, std::uint64_t seed) {
  nlbox_box* box = nullptr;
  if (kind == "perfect" || kind == "noisy") {
    nlbox_poly* poly = nullptr;
    check(nlbox_poly_svetlichny(n, &poly), "svetlichny box");
    if (kind == "perfect") {
      check(nlbox_box_perfect(poly, &box), "perfect box");
    } else {
      // Exact decimal -> rational conversion.
      const auto dot = p_decimal.find('.');
      const std::string frac = dot == std::string::npos ? "" : p_decimal.substr(dot + 1);
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size() && i < 18; ++i) den *= 10;
      const std::string digits =
          (dot == std::string::npos ? p_decimal : p_decimal.substr(0, dot) + frac);
      std::int64_t num = 0;
      try {
        num = std::stoll(digits.empty() ? "0" : digits);
      } catch (...) {
        std::cerr << "nlbox: bad probability \"" << p_decimal << "\"\n";
        nlbox_poly_free(poly);
        return kExitUsage;
      }
      check(nlbox_box_noisy(poly, num, den, &box), "noisy box");
    }
    nlbox_poly_free(poly);
  } else if (kind == "ghz") {
    if (static_cast<int>(angles.size()) != 2 * n) {
      std::cerr << "nlbox: --angles must list 2n values\n";
      return kExitUsage;
    }
    check(nlbox_box_ghz(n, angles.data(), &box), "ghz box");
  } else if (kind == "lhv") {
    if (static_cast<int>(signs.size()) != 2 * n) {
      std::cerr << "nlbox: --signs must list 2n values of +/-1\n";
      return kExitUsage;
    }
    std::vector<int8_t> s8(signs.begin(), signs.end());
    check(nlbox_box_lhv(n, s8.data(), &box), "lhv box");
  } else {
    std::cerr << "nlbox: unknown kind \"" << kind << "\" (perfect|noisy|lhv|ghz)\n";
    return kExitUsage;
  }
  CString json;
  check(nlbox_box_to_json(box, &json.ptr), "serialize");
  nlbox_box_free(box);
  ordered_json payload = ordered_json::parse(json.str());
  ordered_json wrapped;
  wrapped["meta"] = make_meta("box table", seed, {{"n", n}, {"kind", kind}});
  for (auto& [k, v] : payload.items()) wrapped[k] = v;
  emit(wrapped.dump(), out_path);
  return kExitOk;
}

// ===== protocol =====

int cmd_protocol(const std::string& scenario_path, ordered_json flags_config,
                 const std::string& out_path, const std::string& csv_path, std::uint64_t seed) {
  std::string scenario;
  if (!scenario_path.empty()) {
    std::ifstream f(scenario_path, std::ios::binary);
    if (!f) {
      std::cerr << "nlbox: cannot read scenario file " << scenario_path << "\n";
      return kExitUsage;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    scenario = ss.str();
  } else {
    scenario = flags_config.dump();
  }

  CString stats, csv;
  check(nlbox_protocol_run(scenario.c_str(), &stats.ptr, &csv.ptr), "protocol run");

  ordered_json payload = ordered_json::parse(stats.str());
  ordered_json wrapped;
  wrapped["meta"] = make_meta("protocol", seed, ordered_json::parse(scenario));
  for (auto& [k, v] : payload.items()) wrapped[k] = v;
  emit(wrapped.dump(2), out_path);

  const bool has_curve = payload.contains("curve");
  if (!csv_path.empty()) {
    emit(csv.str(), csv_path);
  } else if (has_curve && out_path.empty()) {
    std::cout << "\n" << csv.str();
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nlbox: multipartite nonlocal boxes, generalized Bell inequalities, and "
               "communication-complexity protocol simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nlbox_version()));

  std::uint64_t seed = seed_from_env();
  int threads = 0;
  app.add_option("--seed", seed, "global seed (env NLBOX_SEED as fallback)")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (0 = machine parallelism)")
      ->capture_default_str();

  // bell
  auto* bell = app.add_subcommand("bell", "emit a Bell expression as JSON");
  bell->fallthrough();
  int bell_n = 3;
  std::string bell_form = "svetlichny", bell_out;
  bool bell_pretty = false;
  bell->add_option("--n", bell_n, "party count (2..16)")->required();
  bell->add_option("--form", bell_form, "klyshko | svetlichny | unit")->capture_default_str();
  bell->add_option("--out", bell_out, "output file (default stdout)");
  bell->add_flag("--pretty", bell_pretty, "indent the JSON");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "certify LHV / hybrid / quantum / algebraic bounds");
  bounds->fallthrough();
  int bounds_n = 3;
  std::string bounds_which = "all", bounds_out;
  bool bounds_json = false;
  bounds->add_option("--n", bounds_n, "party count")->required();
  bounds->add_option("--which", bounds_which, "all | lhv | hybrid | ghz | algebraic")
      ->capture_default_str();
  bounds->add_flag("--json", bounds_json, "emit JSON instead of the text table");
  bounds->add_option("--out", bounds_out, "output file (default stdout)");

  // box
  auto* box = app.add_subcommand("box", "box-model tools");
  box->fallthrough();
  box->require_subcommand(1);
  auto* verify = box->add_subcommand("verify", "check the canonical box model");
  verify->fallthrough();
  int verify_n = 3;
  bool verify_fault = false, verify_json = false;
  std::string verify_out;
  verify->add_option("--n", verify_n, "party count (2..8)")->required();
  verify->add_flag("--inject-fault", verify_fault, "corrupt the table first (self-test)")
      ->group("");  // hidden
  verify->add_flag("--json", verify_json, "emit JSON");
  verify->add_option("--out", verify_out, "output file (default stdout)");

  auto* table = box->add_subcommand("table", "emit a box behavior table as JSON");
  table->fallthrough();
  int table_n = 2;
  std::string table_kind = "perfect", table_p = "0.9", table_out;
  std::vector<double> table_angles;
  std::vector<int> table_signs;
  table->add_option("--n", table_n, "party count")->required();
  table->add_option("--kind", table_kind, "perfect | noisy | lhv | ghz")->capture_default_str();
  table->add_option("--p", table_p, "noisy: success probability (decimal)")->capture_default_str();
  table->add_option("--angles", table_angles, "ghz: 2n angles (radians)")->delimiter(',');
  table->add_option("--signs", table_signs, "lhv: 2n outcome signs (+1/-1)")->delimiter(',');
  table->add_option("--out", table_out, "output file (default stdout)");

  // protocol
  auto* protocol = app.add_subcommand("protocol", "run distributed-protocol Monte Carlo scenarios");
  protocol->fallthrough();
  auto* thresholds_cmd = protocol->add_subcommand(
      "thresholds", "print the bipartite and multipartite box-probability thresholds");
  thresholds_cmd->fallthrough();
  std::string proto_scenario, proto_out, proto_csv;
  std::string proto_kind = "equality", proto_box = "perfect", proto_p = "0.95", proto_f = "and";
  int proto_n = 3, proto_rounds = 3, proto_bits = 1;
  std::uint64_t proto_trials = 10000;
  double proto_p0 = 0.75;
  bool proto_bipartite = false;
  protocol->add_option("--scenario", proto_scenario, "scenario config JSON file");
  protocol->add_option("--protocol", proto_kind, "equality | majority | boost | end_to_end")
      ->capture_default_str();
  protocol->add_option("--n", proto_n, "party count")->capture_default_str();
  protocol->add_option("--box-kind", proto_box, "perfect | noisy | lhv | ghz")->capture_default_str();
  protocol->add_option("--p", proto_p, "noisy box success probability (decimal)")
      ->capture_default_str();
  protocol->add_option("--trials", proto_trials, "Monte Carlo trials")->capture_default_str();
  protocol->add_option("--rounds", proto_rounds, "boosting rounds")->capture_default_str();
  protocol->add_flag("--bipartite", proto_bipartite, "use n(n-1) bipartite boxes for equality");
  protocol->add_option("--p0", proto_p0, "boost: synthetic base success probability")
      ->capture_default_str();
  protocol->add_option("--bits-per-party", proto_bits, "end_to_end: input bits per party")
      ->capture_default_str();
  protocol->add_option("--f", proto_f, "end_to_end: and | xor")->capture_default_str();
  protocol->add_option("--out", proto_out, "stats JSON file (default stdout)");
  protocol->add_option("--csv", proto_csv, "boost curve CSV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (bell->parsed()) return cmd_bell(bell_n, bell_form, bell_out, bell_pretty, seed);
  if (bounds->parsed()) return cmd_bounds(bounds_n, bounds_which, bounds_json, seed, threads, bounds_out);
  if (box->parsed()) {
    if (verify->parsed()) return cmd_box_verify(verify_n, verify_fault, verify_json, verify_out, seed);
    if (table->parsed())
      return cmd_box_table(table_n, table_kind, table_p, table_angles, table_signs, table_out, seed);
  }
  if (protocol->parsed()) {
    if (thresholds_cmd->parsed()) {
      double p2 = 0.0, p3 = 0.0;
      check(nlbox_thresholds(&p2, &p3), "thresholds");
      std::cout << "p2 (bipartite two-box threshold)      = " << fmt12(p2) << "\n";
      std::cout << "p3 (multipartite three-box threshold)  = " << fmt12(p3) << "\n";
      return kExitOk;
    }
    ordered_json cfg;
    cfg["protocol"] = proto_kind;
    cfg["n"] = proto_n;
    cfg["box"] = {{"kind", proto_box}};
    if (proto_box == "noisy") cfg["box"]["p"] = proto_p;
    cfg["trials"] = proto_trials;
    cfg["seed"] = seed;
    cfg["rounds"] = proto_rounds;
    if (proto_kind == "equality") cfg["variant"] = proto_bipartite ? "bipartite" : "multipartite";
    if (proto_kind == "boost") cfg["p0"] = proto_p0;
    if (proto_kind == "end_to_end") {
      cfg["bits_per_party"] = proto_bits;
      cfg["f"] = proto_f;
    }
    cfg["threads"] = threads;
    return cmd_protocol(proto_scenario, cfg, proto_out, proto_csv, seed);
  }
  return kExitUsage;
}
