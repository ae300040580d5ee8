#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "adwords/evaluation.hpp"
#include "adwords/factor_lp.hpp"
#include "adwords/instance.hpp"

using namespace adwords;

namespace {

Instance example2(std::int64_t scale = 2) {
  Instance inst;
  inst.scale = scale;
  inst.advertisers = {{"a1", 2 * scale}, {"a2", 2 * scale}};
  for (int i = 1; i <= 3; ++i)
    inst.impressions.push_back(
        {"i" + std::to_string(i), {{0, scale}, {1, scale}}});
  inst.validate();
  return inst;
}

// Independent flat-odometer brute force, enumerating assignments in the
// opposite variable order from the branch-and-bound oracle.
Value odometer_opt(const Instance& inst) {
  const int n = inst.num_impressions();
  const int base = inst.num_advertisers() + 1;
  Value best = 0;
  std::vector<int> digits(static_cast<std::size_t>(n), 0);
  while (true) {
    std::vector<Value> spent(static_cast<std::size_t>(inst.num_advertisers()),
                             0);
    for (int i = n - 1; i >= 0; --i) {
      int a = digits[static_cast<std::size_t>(i)] - 1;
      if (a < 0) continue;
      auto ai = static_cast<std::size_t>(a);
      spent[ai] = std::min(inst.advertisers[ai].budget,
                           spent[ai] + inst.bid(a, i));
    }
    Value total = 0;
    for (Value v : spent) total += v;
    best = std::max(best, total);
    int pos = 0;
    while (pos < n && ++digits[static_cast<std::size_t>(pos)] == base) {
      digits[static_cast<std::size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best;
}

AllocatorConfig independent_config() {
  AllocatorConfig config;
  config.algo = Algo::kIndependent;
  config.table = BasicTable::closed_form(Rat(0));
  config.variant = PanocsVariant::kIndependent;
  return config;
}

}  // namespace

TEST_CASE("offline optimum on the worked examples") {
  Instance inst = example2(1);
  CHECK(offline_opt(inst).value == 3);

  Instance single;
  single.scale = 1;
  single.advertisers = {{"a1", 5}};
  single.impressions = {{"i1", {{0, 3}}}, {"i2", {{0, 3}}}};
  single.validate();
  CHECK(offline_opt(single).value == 5);
}

TEST_CASE("branch-and-bound agrees with the odometer oracle") {
  GenParams params;
  params.advertisers = 4;
  params.impressions = 4;
  params.seed = 17;
  CHECK(offline_opt(generate_instance(Family::kUpperTriangular, params)).value ==
        odometer_opt(generate_instance(Family::kUpperTriangular, params)));
  SplitMix64 rng(500);
  for (int trial = 0; trial < 30; ++trial) {
    params.advertisers = 2 + static_cast<int>(rng.below(3));
    params.impressions = 2 + static_cast<int>(rng.below(5));
    params.seed = rng.next();
    Instance inst = generate_instance(
        trial % 2 == 0 ? Family::kUniformRandom : Family::kMixed, params);
    CHECK(offline_opt(inst).value == odometer_opt(inst));
  }
}

TEST_CASE("budget overflow falls back to the dual bound when given") {
  GenParams params;
  params.advertisers = 9;
  params.impressions = 12;
  params.seed = 1;
  Instance inst = generate_instance(Family::kUniformRandom, params);
  CHECK_THROWS(offline_opt(inst, {}, 1000.0));
  OptResult bounded = offline_opt(inst, {{Rat(100), Rat(1, 2)}}, 1000.0);
  CHECK(bounded.method == OptResult::Method::kBound);
  CHECK(bounded.value == 200);
}

TEST_CASE("greedy achieves at least half of the optimum, deterministically") {
  SplitMix64 rng(600);
  AllocatorConfig config;
  config.algo = Algo::kGreedy;
  config.table = BasicTable::closed_form(Rat(0));
  for (int trial = 0; trial < 40; ++trial) {
    GenParams params;
    params.advertisers = 2 + static_cast<int>(rng.below(3));
    params.impressions = 2 + static_cast<int>(rng.below(6));
    params.seed = rng.next();
    Instance inst = generate_instance(Family::kUniformRandom, params);
    if (offline_opt(inst).value == 0) continue;
    RatioEstimate est = estimate_ratio(inst, config, 1, 0);
    CHECK(est.ratio >= 0.5);
  }
}

TEST_CASE("estimates are deterministic in the seed and jobs-invariant") {
  Instance inst = example2();
  AllocatorConfig config = independent_config();
  RatioEstimate a = estimate_ratio(inst, config, 64, 12345);
  RatioEstimate b = estimate_ratio(inst, config, 64, 12345);
  RatioEstimate c = estimate_ratio(inst, config, 64, 12345, 4);
  CHECK(a.mean_alg == b.mean_alg);
  CHECK(a.mean_alg == c.mean_alg);
  CHECK(a.mean_panorama == c.mean_panorama);
  RatioEstimate other = estimate_ratio(inst, config, 64, 999);
  CHECK(a.mean_alg != doctest::Approx(other.mean_alg).epsilon(1e-12));
}

TEST_CASE("dual upper bound sanity across families") {
  AllocatorConfig config;
  config.algo = Algo::kBasic;
  config.table = BasicTable::closed_form(frozen_large_gamma());
  config.variant = PanocsVariant::kLargeBid;
  Rat gamma_target = std::get<BasicTable>(config.table).big_gamma();
  SplitMix64 rng(700);
  for (Family family : {Family::kAllLarge, Family::kUpperTriangular}) {
    for (int trial = 0; trial < 10; ++trial) {
      GenParams params;
      params.advertisers = 3;
      params.impressions = 6;
      params.seed = rng.next();
      params.scale = 4;
      Instance inst = generate_instance(family, params);
      RunTrace trace = run_primal_dual(inst, config, rng.next());
      OptResult opt = offline_opt(inst);
      CHECK(dual_upper_bound_sanity(opt, trace.ledger.dual, gamma_target));
      CHECK_FALSE(dual_upper_bound_sanity(opt, trace.ledger.dual, Rat(0)));
    }
  }
}

TEST_CASE("expected ratio clears the table guarantee on small instances") {
  // basic on all-large instances at the 0.5041 table; independent-coin at
  // 1/2. Statistical margin: 95% CI half-width from the estimate itself.
  SplitMix64 rng(4242);
  AllocatorConfig basic;
  basic.algo = Algo::kBasic;
  basic.table = BasicTable::closed_form(frozen_large_gamma());
  basic.variant = PanocsVariant::kLargeBid;
  double basic_gamma = std::get<BasicTable>(basic.table).big_gamma().to_double();
  for (int t = 0; t < 6; ++t) {
    GenParams params;
    params.advertisers = 2 + static_cast<int>(rng.below(2));
    params.impressions = 5 + static_cast<int>(rng.below(3));
    params.seed = rng.next();
    params.scale = 4;
    Instance inst = generate_instance(Family::kAllLarge, params);
    if (offline_opt(inst).value == 0) continue;
    RatioEstimate est = estimate_ratio(inst, basic, 800, rng.next());
    double margin = (est.ci_high - est.ci_low) / 2 + 1e-12;
    CHECK(est.ratio >= basic_gamma - margin);
  }
}

TEST_CASE("panocs bound verification in exact mode") {
  auto warmup = PanocsConfig::make(PanocsVariant::kWarmup);
  BoundReport r3 = verify_panocs_bound_exact(warmup, chain_script(3));
  CHECK(r3.ok);
  bool saw_chain_point = false;
  for (const BoundPoint& p : r3.points) {
    if (p.advertiser == 0) {
      saw_chain_point = true;
      CHECK(p.k == 3);
      CHECK(p.bound == Rat(1) - Rat(1, 8) * Rat::pow(Rat(63, 64), 2));
      CHECK(p.exact_prob >= p.bound);
    }
  }
  CHECK(saw_chain_point);

  auto large = PanocsConfig::make(PanocsVariant::kLargeBid);
  BoundReport r2 = verify_panocs_bound_exact(large, chain_script(2));
  CHECK(r2.ok);
  for (const BoundPoint& p : r2.points)
    if (p.advertiser == 0)
      CHECK(p.bound == Rat(1) - Rat(1, 4) * (Rat(1) - frozen_large_gamma()));

  auto indep = PanocsConfig::make(PanocsVariant::kIndependent);
  BoundReport ri = verify_panocs_bound_exact(indep, chain_script(4));
  CHECK(ri.ok);
  for (const BoundPoint& p : ri.points)
    if (p.advertiser == 0) CHECK(p.exact_prob == p.bound);  // tight at gamma 0
}

TEST_CASE("panocs bound verification in monte-carlo mode") {
  auto warmup = PanocsConfig::make(PanocsVariant::kWarmup);
  BoundReport report =
      verify_panocs_bound_mc(warmup, chain_script(4), 20000, 1e-6, 424242);
  CHECK(report.ok);
  for (const BoundPoint& p : report.points) {
    CHECK(p.margin > 0);
    CHECK(p.estimate >= p.bound.to_double() - p.margin);
  }
  CHECK_THROWS(verify_panocs_bound_mc(warmup, chain_script(2), 0, 1e-6, 1));
  CHECK_THROWS(verify_panocs_bound_mc(warmup, chain_script(2), 10, 2.0, 1));
}

TEST_CASE("csv report has the schema header and a stable row format") {
  std::string header = report_csv_header();
  CHECK(header.find("#schema=") == 0);
  CHECK(header.find("instance,algo,table,trials,seed,") != std::string::npos);
  RatioEstimate est;
  est.mean_alg = 2.75;
  est.opt = 3;
  est.ratio = 2.75 / 3;
  est.trials = 8;
  est.seed = 99;
  std::string row = report_csv_row("x.json", "independent", "default", est, 0.5);
  CHECK(row == "x.json,independent,default,8,99,2.75,3,0.916666667,0,0,0.5,1\n");
}
