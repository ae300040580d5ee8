#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "adwords/allocators.hpp"
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

AllocatorConfig independent_config() {
  AllocatorConfig config;
  config.algo = Algo::kIndependent;
  config.table = BasicTable::closed_form(Rat(0));
  config.variant = PanocsVariant::kIndependent;
  return config;
}

AllocatorConfig basic_config() {
  AllocatorConfig config;
  config.algo = Algo::kBasic;
  config.table = BasicTable::closed_form(frozen_large_gamma());
  config.variant = PanocsVariant::kLargeBid;
  return config;
}

HybridTable certified_hybrid(int kmax) {
  LpSolution sol = solve(build_hybrid_lp(frozen_large_gamma(), kmax));
  REQUIRE(sol.status == LpSolution::Status::kOptimal);
  return export_hybrid_table(frozen_large_gamma(), kmax, sol);
}

AllocatorConfig hybrid_config(int kmax = 6) {
  AllocatorConfig config;
  config.algo = Algo::kHybrid;
  config.table = certified_hybrid(kmax);
  config.variant = PanocsVariant::kLargeBid;
  return config;
}

}  // namespace

TEST_CASE("a single advertiser forces deterministic rounds") {
  Instance inst;
  inst.scale = 2;
  inst.advertisers = {{"a1", 8}};
  inst.impressions = {{"i1", {{0, 4}}}, {"i2", {{0, 4}}}};
  inst.validate();
  RunTrace trace = run_primal_dual(inst, basic_config(), 1);
  for (const auto& rec : trace.records)
    CHECK(rec.kind == AssignmentRecord::Kind::kDeterministic);
  CHECK(trace.realized_payment == 8);
  CHECK(trace.ledger.pbar == trace.ledger.dual);
}

TEST_CASE("example-2 rounds are all randomized and both panoramas advance") {
  Instance inst = example2();
  RunTrace trace = run_primal_dual(inst, independent_config(), 3);
  for (const auto& rec : trace.records)
    CHECK(rec.kind == AssignmentRecord::Kind::kRandomized);
  // Pbar is deterministic: 2 * scale * ((1 - 2^-2) + (1 - 2^-1)) = 2.5 * scale.
  CHECK(trace.ledger.pbar == Rat(5, 2) * Rat(inst.scale));
  CHECK(trace.ledger.pbar == trace.ledger.dual);
  CHECK(trace.realized_payment >= trace.panorama_payment);
  // Both advertisers saw every semi-assignment: k profile 2 on the first
  // scale-cells, 1 on the rest.
  std::istringstream dump0(trace.panorama_dumps[0]);
  std::string line;
  std::getline(dump0, line);
  CHECK(line == "0.." + std::to_string(inst.scale) + " k=2");
}

TEST_CASE("realized payment and panorama payment obey the sandwich") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    GenParams params;
    params.advertisers = 3;
    params.impressions = 6;
    params.seed = rng.next();
    params.scale = 4;
    Instance inst = generate_instance(Family::kMixed, params);
    for (const AllocatorConfig& config :
         {independent_config(), basic_config()}) {
      RunTrace trace = run_primal_dual(inst, config, rng.next());
      CHECK(trace.realized_payment >= trace.panorama_payment);
      CHECK(trace.ledger.pbar == trace.ledger.dual);
      OptResult opt = offline_opt(inst);
      CHECK(opt.value >= trace.realized_payment);
    }
  }
}

TEST_CASE("ledger alpha reconstructs from the final panorama counters") {
  SplitMix64 rng(33);
  for (int trial = 0; trial < 25; ++trial) {
    GenParams params;
    params.advertisers = 3;
    params.impressions = 7;
    params.seed = rng.next();
    params.scale = 4;
    Instance inst = generate_instance(
        trial % 2 == 0 ? Family::kAllLarge : Family::kMixed, params);
    AllocatorConfig config = trial % 3 == 2 ? hybrid_config() : basic_config();
    RunTrace trace = run_primal_dual(inst, config, rng.next());
    // Rebuild the panoramas by replaying commits, then compare alpha.
    std::vector<AdvertiserPanorama> panos;
    for (const auto& adv : inst.advertisers) panos.emplace_back(adv.budget);
    for (const auto& rec : trace.records) {
      if (rec.kind == AssignmentRecord::Kind::kRandomized) {
        for (const auto* c : {&rec.first, &rec.second})
          panos[static_cast<std::size_t>(c->advertiser)].commit(
              c->subset, CommitKind::kSemi,
              is_large_bid(c->bid,
                           inst.advertisers[static_cast<std::size_t>(c->advertiser)]
                               .budget));
      } else if (rec.kind == AssignmentRecord::Kind::kDeterministic &&
                 !rec.fallback) {
        panos[static_cast<std::size_t>(rec.first.advertiser)].commit(
            rec.first.subset, CommitKind::kDeterministic);
      }
    }
    for (int a = 0; a < inst.num_advertisers(); ++a)
      CHECK(reconstruct_alpha(panos[static_cast<std::size_t>(a)],
                              config.table) ==
            trace.ledger.alpha[static_cast<std::size_t>(a)]);
  }
}

TEST_CASE("hybrid runs keep the exact ledger identity on mixed instances") {
  AllocatorConfig config = hybrid_config();
  SplitMix64 rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    GenParams params;
    params.advertisers = 3;
    params.impressions = 6;
    params.seed = rng.next();
    params.scale = 10;
    Instance inst = generate_instance(Family::kMixed, params);
    RunTrace trace = run_primal_dual(inst, config, rng.next());
    CHECK(trace.ledger.pbar == trace.ledger.dual);
    CHECK(trace.realized_payment >= trace.panorama_payment);
  }
}

TEST_CASE("hybrid rejects odd budgets") {
  Instance inst;
  inst.scale = 1;
  inst.advertisers = {{"a1", 3}, {"a2", 4}};
  inst.impressions = {{"i1", {{0, 1}, {1, 1}}}};
  inst.validate();
  CHECK_THROWS_WITH_AS(run_primal_dual(inst, hybrid_config(), 1),
                       doctest::Contains("even budgets"), std::runtime_error);
}

TEST_CASE("greedy follows the marginal-payment rule with low-index ties") {
  Instance inst;
  inst.scale = 1;
  inst.advertisers = {{"a1", 4}, {"a2", 4}};
  inst.impressions = {{"i1", {{0, 3}, {1, 3}}},  // tie -> a1
                      {"i2", {{0, 3}, {1, 2}}},  // a1 remaining 1 -> a2
                      {"i3", {{0, 1}, {1, 1}}},
                      {"i4", {{0, 4}, {1, 4}}}};
  inst.validate();
  RunTrace trace = run_greedy(inst);
  CHECK(trace.records[0].first.advertiser == 0);
  CHECK(trace.records[1].first.advertiser == 1);
  CHECK(trace.records[2].first.advertiser == 0);
  CHECK(trace.records[3].first.advertiser == 1);
  CHECK(trace.realized_payment == 3 + 2 + 1 + 2);
  // Exhausted budgets leave later impressions unassigned.
  Instance tiny;
  tiny.scale = 1;
  tiny.advertisers = {{"a1", 1}};
  tiny.impressions = {{"i1", {{0, 1}}}, {"i2", {{0, 1}}}};
  tiny.validate();
  RunTrace t2 = run_greedy(tiny);
  CHECK(t2.records[1].kind == AssignmentRecord::Kind::kUnassigned);
}

TEST_CASE("greedy and msvv never exceed budgets") {
  SplitMix64 rng(61);
  for (int trial = 0; trial < 60; ++trial) {
    GenParams params;
    params.advertisers = 3;
    params.impressions = 10;
    params.seed = rng.next();
    Instance inst = generate_instance(Family::kUniformRandom, params);
    for (auto run : {run_greedy, run_msvv}) {
      RunTrace trace = run(inst);
      std::vector<Value> spent(static_cast<std::size_t>(inst.num_advertisers()),
                               0);
      Value total = 0;
      for (const auto& rec : trace.records) {
        if (rec.kind != AssignmentRecord::Kind::kDeterministic) continue;
        auto a = static_cast<std::size_t>(rec.first.advertiser);
        Value marginal =
            std::min(inst.bid(rec.first.advertiser, rec.impression),
                     inst.advertisers[a].budget - spent[a]);
        spent[a] += marginal;
        total += marginal;
      }
      for (std::size_t a = 0; a < spent.size(); ++a)
        CHECK(spent[a] <= inst.advertisers[a].budget);
      CHECK(total == trace.realized_payment);
    }
  }
}

TEST_CASE("msvv closed form values") {
  CHECK(msvv_alpha(Rat(1, 2)) == Rat(2, 9));
  CHECK(msvv_alpha(Rat(1)) == Rat(5, 9));
  CHECK(msvv_beta(Rat(1)) == Rat(4, 9));
  // Fresh advertiser's marginal offer per unit of bid: finite difference of
  // the closed form at 0.
  Rat eps(1, 1000);
  CHECK(msvv_beta(eps) / eps == Rat(5, 9));
  CHECK(msvv_feasibility_min_slack(1000) >= Rat(0));
}

TEST_CASE("msvv flags non-small bids and skips zero-bid impressions") {
  Instance inst;
  inst.scale = 1;
  inst.advertisers = {{"a1", 4}};
  inst.impressions = {{"i1", {{0, 3}}}, {"i2", {}}};
  inst.validate();
  RunTrace trace = run_msvv(inst);
  CHECK(trace.small_bid_warning);
  CHECK(trace.records[1].kind == AssignmentRecord::Kind::kUnassigned);
  CHECK(trace.ledger.beta[1] == Rat(0));
  CHECK(trace.ledger.pbar == trace.ledger.dual);
}

TEST_CASE("dual feasibility slack: empty subset gives alpha >= 0") {
  Instance inst = example2();
  RunTrace trace = run_primal_dual(inst, independent_config(), 5);
  FeasibilityResult feas = dual_feasibility_check(
      inst, trace.ledger.alpha, trace.ledger.beta, Rat(1, 2));
  // gamma = 0 table is 1/2-competitive; slack must be nonnegative.
  CHECK(feas.min_slack >= Rat(0));
  for (const Rat& a : trace.ledger.alpha) CHECK(a >= Rat(0));
  CHECK_THROWS(dual_feasibility_check(inst, trace.ledger.alpha,
                                      trace.ledger.beta, Rat(0)));
}

TEST_CASE("basic ledger is dual feasible at the 0.5041 table on all-large") {
  AllocatorConfig config = basic_config();
  Rat gamma_target = std::get<BasicTable>(config.table).big_gamma();
  SplitMix64 rng(300);
  for (int trial = 0; trial < 15; ++trial) {
    GenParams params;
    params.advertisers = 2 + static_cast<int>(rng.below(2));
    params.impressions = 5 + static_cast<int>(rng.below(4));
    params.seed = rng.next();
    params.scale = 4;
    Instance inst = generate_instance(Family::kAllLarge, params);
    RunTrace trace = run_primal_dual(inst, config, rng.next());
    FeasibilityResult feas = dual_feasibility_check(
        inst, trace.ledger.alpha, trace.ledger.beta, gamma_target);
    CHECK(feas.min_slack >= Rat(0));
  }
}

TEST_CASE("trace certification round trips and catches tampering") {
  Instance inst = example2(4);
  AllocatorConfig config = basic_config();
  RunTrace trace = run_primal_dual(inst, config, 11);
  std::string json = trace_to_json(inst, &config.table, trace);
  CertifyResult ok = certify_trace(json, std::nullopt);
  CHECK(ok.ok);

  // Tamper with a recorded subset: the replay must fail loudly.
  std::string bad = json;
  auto pos = bad.find("\"Pbar\": \"");
  REQUIRE(pos != std::string::npos);
  bad.replace(pos, 9, "\"Pbar\": \"9");
  CertifyResult broken = certify_trace(bad, std::nullopt);
  CHECK_FALSE(broken.ok);
}

TEST_CASE("deterministic traces replay via rerun") {
  Instance inst = example2(4);
  RunTrace trace = run_greedy(inst);
  std::string json = trace_to_json(inst, nullptr, trace);
  CHECK(certify_trace(json, std::nullopt).ok);
}
