#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "adwords/allocators.hpp"
#include "adwords/evaluation.hpp"
#include "adwords/factor_lp.hpp"
#include "adwords/instance.hpp"
#include "adwords/panocs.hpp"
#include "adwords/params.hpp"

namespace {

using namespace adwords;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

void append_report(const std::string& path, const std::string& row) {
  bool fresh = !std::filesystem::exists(path) ||
               std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  if (fresh) out << report_csv_header();
  out << row;
}

AnyTable load_table(const std::string& path) {
  std::string text = read_file(path);
  if (json_table_is_hybrid(text)) return hybrid_table_from_json(text);
  return basic_table_from_json(text);
}

AnyTable default_table(Algo algo) {
  switch (algo) {
    case Algo::kIndependent: return BasicTable::closed_form(Rat(0));
    case Algo::kBasic: return BasicTable::closed_form(frozen_large_gamma());
    case Algo::kHybrid: {
      LinearProgram lp = build_hybrid_lp(frozen_large_gamma(), 20);
      LpSolution sol = solve(lp);
      if (sol.status != LpSolution::Status::kOptimal)
        throw std::runtime_error("hybrid LP did not solve");
      return export_hybrid_table(frozen_large_gamma(), 20, sol);
    }
    default: return BasicTable::closed_form(Rat(0));
  }
}

double table_guarantee(const AnyTable& table, Algo algo) {
  switch (algo) {
    case Algo::kGreedy: return 0.5;
    case Algo::kMsvv: return 5.0 / 9.0;
    case Algo::kIndependent: return 0.5;
    default:
      return std::holds_alternative<BasicTable>(table)
                 ? std::get<BasicTable>(table).big_gamma().to_double()
                 : std::get<HybridTable>(table).big_gamma.to_double();
  }
}

int cmd_gen(const std::string& family, int advertisers, int impressions,
            std::uint64_t seed, std::int64_t scale, const std::string& out) {
  GenParams params;
  params.advertisers = advertisers;
  params.impressions = impressions;
  params.seed = seed;
  params.scale = scale;
  Instance inst = generate_instance(family_from_string(family), params);
  std::string text = serialize_instance(inst);
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

int cmd_opt(const std::string& instance_path) {
  Instance inst = load_instance_file(instance_path);
  OptResult opt = offline_opt(inst);
  std::cout << "opt " << opt.value << "\n";
  for (int i = 0; i < inst.num_impressions(); ++i) {
    int a = opt.assignment[static_cast<std::size_t>(i)];
    std::cout << inst.impressions[static_cast<std::size_t>(i)].id << " -> "
              << (a < 0 ? std::string("-")
                        : inst.advertisers[static_cast<std::size_t>(a)].id)
              << "\n";
  }
  return 0;
}

int cmd_lp(const std::string& mode, const std::string& gamma_text, int kmax,
           bool closed_form, const std::string& out,
           const std::string& export_lp) {
  if (mode == "basic") {
    Rat gamma = Rat::parse(gamma_text);
    if (closed_form) {
      BasicTable table = BasicTable::closed_form(gamma);
      Rat violation = certify_basic_table(table, std::max(kmax, 64));
      if (violation.sign() > 0) {
        std::cerr << "closed form failed certification\n";
        return 1;
      }
      std::cout << "Gamma = " << table.big_gamma().to_string() << " ~ "
                << table.big_gamma().to_double() << "\n";
      std::cout << "dalpha(1) = " << table.dalpha(1).to_string()
                << ", dbeta(1) = " << table.dbeta(1).to_string() << "\n";
      for (int k = 2; k <= 6; ++k)
        std::cout << "dalpha(" << k << ") = " << table.dalpha(k).to_double()
                  << ", dbeta(" << k << ") = " << table.dbeta(k).to_double()
                  << "\n";
      if (!out.empty()) write_file(out, table_to_json(table));
      return 0;
    }
    LinearProgram lp = build_basic_lp(gamma, kmax);
    if (!export_lp.empty()) write_file(export_lp, lp.to_text());
    LpSolution sol = solve(lp);
    if (sol.status != LpSolution::Status::kOptimal) {
      std::cerr << "basic LP not optimal (status "
                << static_cast<int>(sol.status) << ")\n";
      return 1;
    }
    BasicTable table = export_basic_table(gamma, kmax, sol);
    std::cout << "Gamma = " << table.big_gamma().to_double()
              << " (kmax = " << kmax << ", exact vertex = " << sol.exact_vertex
              << ")\n";
    if (!out.empty()) write_file(out, table_to_json(table));
    return 0;
  }
  if (mode != "hybrid") {
    std::cerr << "lp mode must be basic or hybrid\n";
    return 2;
  }
  Rat gamma = Rat::parse(gamma_text);
  LinearProgram lp = build_hybrid_lp(gamma, kmax);
  if (!export_lp.empty()) write_file(export_lp, lp.to_text());
  LpSolution sol = solve(lp);
  if (sol.status != LpSolution::Status::kOptimal) {
    std::cerr << "hybrid LP not optimal\n";
    return 1;
  }
  HybridTable table = export_hybrid_table(gamma, kmax, sol);
  std::cout << "Gamma = " << table.big_gamma.to_double() << " (kmax = " << kmax
            << ", certified max violation = 0)\n";
  if (!out.empty()) write_file(out, table_to_json(table));
  return 0;
}

int cmd_run(const std::string& algo_name, const std::string& instance_path,
            const std::string& table_path, int trials, std::uint64_t seed,
            const std::string& report, const std::string& trace_path,
            const std::string& variant_name, int jobs) {
  Instance inst = load_instance_file(instance_path);
  Algo algo = algo_from_string(algo_name);
  AllocatorConfig config;
  config.algo = algo;
  if (algo == Algo::kGreedy || algo == Algo::kMsvv) {
    config.table = BasicTable::closed_form(Rat(0));  // unused
  } else {
    config.table = table_path.empty() ? default_table(algo)
                                      : load_table(table_path);
    if (algo == Algo::kHybrid &&
        !std::holds_alternative<HybridTable>(config.table))
      throw std::runtime_error("hybrid run needs a hybrid table");
    if (algo != Algo::kHybrid &&
        std::holds_alternative<HybridTable>(config.table))
      throw std::runtime_error(algo_name + " run needs a basic table");
  }
  switch (algo) {
    case Algo::kIndependent: config.variant = PanocsVariant::kIndependent; break;
    case Algo::kHybrid: config.variant = PanocsVariant::kLargeBid; break;
    case Algo::kBasic: config.variant = PanocsVariant::kLargeBid; break;
    default: break;
  }
  if (!variant_name.empty()) {
    if (algo == Algo::kHybrid && variant_name != "large")
      throw std::runtime_error("the hybrid allocator is tied to the large-bid "
                               "selection variant");
    config.variant = variant_from_string(variant_name);
  }

  RatioEstimate est = estimate_ratio(inst, config, trials, seed, jobs);
  std::cout << "mean_alg " << est.mean_alg << " opt " << est.opt << " ratio "
            << est.ratio << " ci [" << est.ci_low << ", " << est.ci_high
            << "]\n";
  double guarantee = table_guarantee(config.table, algo);
  if (!report.empty())
    append_report(report,
                  report_csv_row(instance_path, algo_name,
                                 table_path.empty() ? "default" : table_path,
                                 est, guarantee));
  if (!trace_path.empty()) {
    RunTrace trace = run_algo(inst, config, seed);
    const AnyTable* table_ptr =
        (algo == Algo::kGreedy || algo == Algo::kMsvv) ? nullptr
                                                       : &config.table;
    write_file(trace_path, trace_to_json(inst, table_ptr, trace));
  }
  return 0;
}

int cmd_panocs_verify(const std::string& variant_name, int chain,
                      const std::string& script_path, const std::string& mode,
                      int trials, double delta, std::uint64_t seed, int kmax) {
  PanocsConfig config =
      PanocsConfig::make(variant_from_string(variant_name), kmax);
  Script script;
  if (chain > 0)
    script = chain_script(chain);
  else if (!script_path.empty())
    script = script_from_json(read_file(script_path));
  else
    throw std::runtime_error("panocs-verify needs --chain or --script");
  BoundReport report;
  if (mode == "exact")
    report = verify_panocs_bound_exact(config, script);
  else if (mode == "mc")
    report = verify_panocs_bound_mc(config, script, trials, delta, seed);
  else
    throw std::runtime_error("mode must be exact or mc");
  for (const BoundPoint& p : report.points) {
    std::cout << "advertiser " << p.advertiser << " point " << p.point
              << " k=" << p.k << " kL=" << p.k_large << " bound "
              << p.bound.to_double();
    if (mode == "exact")
      std::cout << " exact " << p.exact_prob.to_string() << " ~ "
                << p.exact_prob.to_double();
    else
      std::cout << " estimate " << p.estimate << " margin " << p.margin;
    std::cout << (p.ok ? " ok" : " FAIL") << "\n";
  }
  std::cout << (report.ok ? "PASS" : "FAIL") << "\n";
  return report.ok ? 0 : 1;
}

int cmd_certify(const std::string& trace_path, const std::string& gamma_text) {
  std::optional<Rat> gamma;
  if (!gamma_text.empty()) gamma = Rat::parse(gamma_text);
  CertifyResult result = certify_trace(read_file(trace_path), gamma);
  for (const std::string& f : result.failures) std::cout << f << "\n";
  std::cout << (result.ok ? "PASS" : "FAIL") << "\n";
  return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Panorama-view AdWords allocators, factor LPs, and verifiers"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate an instance");
  std::string family = "uniform-random", out_path;
  int advertisers = 2, impressions = 4;
  std::uint64_t seed = 0;
  std::int64_t scale = 100;
  gen->add_option("--family", family, "family")->required();
  gen->add_option("--advertisers", advertisers)->required();
  gen->add_option("--impressions", impressions)->required();
  gen->add_option("--seed", seed)->required();
  gen->add_option("--scale", scale);
  gen->add_option("-o,--out", out_path);

  // run
  auto* run = app.add_subcommand("run", "run an allocator");
  std::string algo_name, instance_path, table_path, report_path, trace_path,
      variant_name;
  int trials = 1, jobs = 1;
  run->add_option("--algo", algo_name)->required();
  run->add_option("--instance", instance_path)->required();
  run->add_option("--table", table_path);
  run->add_option("--trials", trials);
  run->add_option("--seed", seed)->required();
  run->add_option("--report", report_path);
  run->add_option("--trace", trace_path);
  run->add_option("--variant", variant_name);
  run->add_option("--jobs", jobs);

  // opt
  auto* opt = app.add_subcommand("opt", "offline optimum");
  std::string opt_instance;
  opt->add_option("--instance", opt_instance)->required();

  // lp
  auto* lp = app.add_subcommand("lp", "build/solve the factor LPs");
  std::string lp_mode, lp_gamma = "0.05144", lp_out, lp_export;
  int lp_kmax = 20;
  bool lp_closed = false;
  lp->add_option("mode", lp_mode, "basic or hybrid")->required();
  lp->add_option("--gamma", lp_gamma);
  lp->add_option("--kmax", lp_kmax);
  lp->add_flag("--closed-form", lp_closed);
  lp->add_option("-o,--out", lp_out);
  lp->add_option("--export-lp", lp_export);

  // panocs-verify
  auto* pv = app.add_subcommand("panocs-verify", "verify PanOCS guarantees");
  std::string pv_variant, pv_script, pv_mode = "exact";
  int pv_chain = 0, pv_trials = 100000, pv_kmax = 20;
  double pv_delta = 1e-6;
  pv->add_option("--variant", pv_variant)->required();
  pv->add_option("--chain", pv_chain);
  pv->add_option("--script", pv_script);
  pv->add_option("--mode", pv_mode);
  pv->add_option("--trials", pv_trials);
  pv->add_option("--delta", pv_delta);
  pv->add_option("--seed", seed);
  pv->add_option("--kmax", pv_kmax);

  // certify
  auto* cert = app.add_subcommand("certify", "replay and re-assert a trace");
  std::string cert_trace, cert_gamma;
  cert->add_option("--trace", cert_trace)->required();
  cert->add_option("--gamma", cert_gamma);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed())
      return cmd_gen(family, advertisers, impressions, seed, scale, out_path);
    if (run->parsed())
      return cmd_run(algo_name, instance_path, table_path, trials, seed,
                     report_path, trace_path, variant_name, jobs);
    if (opt->parsed()) return cmd_opt(opt_instance);
    if (lp->parsed())
      return cmd_lp(lp_mode, lp_gamma, lp_kmax, lp_closed, lp_out, lp_export);
    if (pv->parsed())
      return cmd_panocs_verify(pv_variant, pv_chain, pv_script, pv_mode,
                               pv_trials, pv_delta, seed, pv_kmax);
    if (cert->parsed()) return cmd_certify(cert_trace, cert_gamma);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::string what = e.what();
    if (what.find("budget exceeded") != std::string::npos) return 1;
    return 2;
  }
  return 2;
}
