#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "adwords/instance.hpp"
#include "adwords/panocs.hpp"

using namespace adwords;

namespace {

RoundCandidate cand(int adv, Value lo, Value hi, Value bid, Value budget) {
  return {adv, SubsetOfCircle::single(lo, hi), bid, budget};
}

// Random panoramic scripts: previews committed as semi-assignments, so the
// structural lemmas' hypotheses hold.
Script random_panoramic_script(SplitMix64& rng, int advertisers, int rounds,
                               Value budget, bool all_large) {
  Script script;
  script.budgets.assign(static_cast<std::size_t>(advertisers), budget);
  std::vector<AdvertiserPanorama> panos;
  for (int a = 0; a < advertisers; ++a) panos.emplace_back(budget);
  for (int r = 0; r < rounds; ++r) {
    int a1 = static_cast<int>(rng.below(static_cast<std::uint64_t>(advertisers)));
    int a2 = static_cast<int>(rng.below(static_cast<std::uint64_t>(advertisers - 1)));
    if (a2 >= a1) ++a2;
    auto draw_bid = [&]() {
      if (all_large)
        return budget / 2 +
               static_cast<Value>(rng.below(static_cast<std::uint64_t>(budget / 2) + 1));
      return 1 + static_cast<Value>(rng.below(static_cast<std::uint64_t>(budget)));
    };
    RoundPair pair;
    Value b1 = draw_bid(), b2 = draw_bid();
    pair.first = {a1, panos[static_cast<std::size_t>(a1)].next_subset(b1), b1,
                  budget};
    pair.second = {a2, panos[static_cast<std::size_t>(a2)].next_subset(b2), b2,
                   budget};
    panos[static_cast<std::size_t>(a1)].commit(pair.first.subset,
                                               CommitKind::kSemi,
                                               is_large_bid(b1, budget));
    panos[static_cast<std::size_t>(a2)].commit(pair.second.subset,
                                               CommitKind::kSemi,
                                               is_large_bid(b2, budget));
    script.rounds.push_back(std::move(pair));
  }
  return script;
}

}  // namespace

TEST_CASE("adjacency keeps rounds with an untouched shared point") {
  // A=[0,2), B=[0,1), C=[1,2): C is adjacent to A (point in [1,2) untouched
  // by B) and not to B.
  std::vector<SubsetOfCircle> prior = {SubsetOfCircle::single(0, 2),
                                       SubsetOfCircle::single(0, 1)};
  auto adj = adjacency(prior, SubsetOfCircle::single(1, 2));
  CHECK(adj == std::vector<int>{0});
  // Disjoint subsets are never adjacent.
  CHECK(adjacency({SubsetOfCircle::single(0, 1)}, SubsetOfCircle::single(1, 2))
            .empty());
  // Full-circle history: only the two most recent rounds stay adjacent.
  std::vector<SubsetOfCircle> large(5, SubsetOfCircle::single(0, 2));
  auto adj_large = adjacency(large, SubsetOfCircle::single(0, 2));
  CHECK(adj_large == std::vector<int>{4});
  std::vector<SubsetOfCircle> halves = {
      SubsetOfCircle::single(0, 2), SubsetOfCircle::single(0, 1),
      SubsetOfCircle::single(1, 2)};
  auto adj_halves = adjacency(halves, SubsetOfCircle::single(0, 2));
  CHECK(adj_halves == std::vector<int>{1, 2});
}

TEST_CASE("warmup reproduces the exact two-round chain probability") {
  auto cfg = PanocsConfig::make(PanocsVariant::kWarmup);
  Rat p = selection_probability_exact(cfg, chain_script(2), 0, 0);
  CHECK(Rat(1) - p == Rat(63, 256));
}

TEST_CASE("warmup chain follows f_m = f_{m-1} - f_{m-2}/64") {
  auto cfg = PanocsConfig::make(PanocsVariant::kWarmup);
  Rat f2 = chain_no_arc_probability(cfg, 4, 2);
  Rat f3 = chain_no_arc_probability(cfg, 4, 3);
  Rat f4 = chain_no_arc_probability(cfg, 4, 4);
  CHECK(f2 == Rat(63, 64));
  CHECK(f3 == Rat(62, 64));
  CHECK(f4 == f3 - f2 / Rat(64));
}

TEST_CASE("warmup opposite selection flips the shared advertiser") {
  // In a matched pair of adjacent rounds the second selects the opposite
  // side w.r.t. the shared advertiser: P[both rounds select advertiser 0]
  // on a 2-chain is (1 - 1/64) / 4.
  auto cfg = PanocsConfig::make(PanocsVariant::kWarmup);
  Rat both(0);
  enumerate_selector(cfg, chain_script(2), [&](const Selector& s, const Rat& w) {
    if (s.selections()[0] == 1 && s.selections()[1] == 1) both += w;
  });
  CHECK(both == (Rat(1) - Rat(1, 64)) / Rat(4));
}

TEST_CASE("independent coin gives 1 - 2^-k") {
  auto cfg = PanocsConfig::make(PanocsVariant::kIndependent);
  for (int k = 1; k <= 5; ++k) {
    Rat p = selection_probability_exact(cfg, chain_script(k), 0, 0);
    CHECK(p == Rat(1) - Rat(BigInt(1), BigInt::pow(BigInt(2),
                                                   static_cast<unsigned>(k))));
  }
}

TEST_CASE("large-bid chains meet the frozen-gamma guarantee") {
  auto cfg = PanocsConfig::make(PanocsVariant::kLargeBid);
  Rat gamma = frozen_large_gamma();
  for (int k = 1; k <= 4; ++k) {
    Rat p = selection_probability_exact(cfg, chain_script(k), 0, 0);
    Rat bound = Rat(1) -
                Rat(BigInt(1), BigInt::pow(BigInt(2), static_cast<unsigned>(k))) *
                    Rat::pow(Rat(1) - gamma, static_cast<unsigned>(k - 1));
    CHECK(p >= bound);
  }
  // k=3: P[never assigned] <= 2^-3 (1-gamma)^2.
  Rat p3 = selection_probability_exact(cfg, chain_script(3), 0, 0);
  CHECK(Rat(1) - p3 <= Rat(1, 8) * Rat::pow(Rat(1) - gamma, 2));
}

TEST_CASE("sender probability enters the chain probability as derived") {
  // On a bare 2-chain the arc realizes iff the first round is a sender that
  // picks it and the second is a receiver: p * (1-p) / 4.
  auto cfg = PanocsConfig::make(PanocsVariant::kLargeBid);
  Rat p = cfg.sender_p;
  Rat arc_prob = p * (Rat(1) - p) / Rat(4);
  Rat never = Rat(1) - selection_probability_exact(cfg, chain_script(2), 0, 0);
  CHECK(never == Rat(1, 4) * (Rat(1) - arc_prob));
}

TEST_CASE("marginals are exactly one half for every variant") {
  SplitMix64 rng(4);
  Script mixed = random_panoramic_script(rng, 3, 3, 8, false);
  for (PanocsVariant v :
       {PanocsVariant::kIndependent, PanocsVariant::kWarmup,
        PanocsVariant::kLargeBid}) {
    auto cfg = PanocsConfig::make(v);
    for (const Rat& m : selection_marginals_exact(cfg, mixed))
      CHECK(m == Rat(1, 2));
    for (const Rat& m : selection_marginals_exact(cfg, chain_script(3)))
      CHECK(m == Rat(1, 2));
  }
  auto general = PanocsConfig::make(PanocsVariant::kGeneralBid, 2);
  for (const Rat& m : selection_marginals_exact(general, chain_script(2)))
    CHECK(m == Rat(1, 2));
  Script tiny = random_panoramic_script(rng, 3, 2, 8, false);
  for (const Rat& m : selection_marginals_exact(general, tiny))
    CHECK(m == Rat(1, 2));
}

TEST_CASE("identical seeds give identical selection traces") {
  SplitMix64 rng(9);
  Script script = random_panoramic_script(rng, 4, 12, 16, false);
  for (PanocsVariant v :
       {PanocsVariant::kIndependent, PanocsVariant::kWarmup,
        PanocsVariant::kLargeBid, PanocsVariant::kGeneralBid}) {
    auto cfg = PanocsConfig::make(v, 4);
    auto run = [&](std::uint64_t seed) {
      auto sel = make_selector(cfg);
      SeededSource src(seed);
      for (const RoundPair& pair : script.rounds) sel->select(pair, src);
      return sel->selections();
    };
    CHECK(run(42) == run(42));
  }
}

TEST_CASE("the ex-post graph is a matching on every enumerated realization") {
  SplitMix64 rng(12);
  for (bool all_large : {true, false}) {
    Script script = random_panoramic_script(rng, 3, 4, 8, all_large);
    for (PanocsVariant v : {PanocsVariant::kWarmup, PanocsVariant::kLargeBid}) {
      auto cfg = PanocsConfig::make(v);
      enumerate_selector(cfg, script, [&](const Selector& s, const Rat&) {
        std::set<int> used;
        for (const RealizedArc& arc : s.realized_arcs()) {
          CHECK(used.insert(arc.from_round).second);
          CHECK(used.insert(arc.to_round).second);
        }
      });
    }
  }
}

TEST_CASE("large-bid ex-ante degree stays at most 4 on all-large runs") {
  SplitMix64 rng(77);
  auto cfg = PanocsConfig::make(PanocsVariant::kLargeBid);
  for (int trial = 0; trial < 50; ++trial) {
    Script script = random_panoramic_script(rng, 3, 14, 12, true);
    auto sel = make_selector(cfg);
    SeededSource src(rng.next());
    for (const RoundPair& pair : script.rounds) sel->select(pair, src);
    CHECK(sel->max_ex_ante_degree() <= 4);
  }
}

TEST_CASE("general-bid structural properties on panoramic scripts") {
  SplitMix64 rng(55);
  auto cfg = PanocsConfig::make(PanocsVariant::kGeneralBid, 8);
  for (int trial = 0; trial < 60; ++trial) {
    Script script = random_panoramic_script(rng, 3, 16, 12, false);
    auto sel = make_selector(cfg);
    SeededSource src(rng.next());
    for (const RoundPair& pair : script.rounds) sel->select(pair, src);

    // Realized per-point semi-assignment cap, per advertiser.
    std::map<int, int> kmax_realized;
    for (std::size_t a = 0; a < script.budgets.size(); ++a) {
      std::vector<int> cover(static_cast<std::size_t>(script.budgets[a]), 0);
      for (const RoundPair& pair : script.rounds)
        for (const RoundCandidate* c : {&pair.first, &pair.second})
          if (c->advertiser == static_cast<int>(a))
            for (const Interval& iv : c->subset.parts())
              for (Value y = iv.start; y < iv.end; ++y)
                cover[static_cast<std::size_t>(y)] += 1;
      int top = 0;
      for (int v : cover) top = std::max(top, v);
      kmax_realized[static_cast<int>(a)] = top;
    }
    for (const auto& [adv, count] : sel->first_level_subset_counts())
      CHECK(count <= 2 * std::max(1, kmax_realized[adv]));

    // Group-level ex-post arcs form a matching.
    std::set<int> used;
    for (const auto& [from, to] : sel->realized_group_arcs()) {
      CHECK(used.insert(from).second);
      CHECK(used.insert(to).second);
    }
  }
}

TEST_CASE("script json round trips") {
  Script script = chain_script(3);
  Script again = script_from_json(script_to_json(script));
  CHECK(again.budgets == script.budgets);
  REQUIRE(again.rounds.size() == script.rounds.size());
  for (std::size_t r = 0; r < script.rounds.size(); ++r) {
    CHECK(again.rounds[r].first.advertiser == script.rounds[r].first.advertiser);
    CHECK(again.rounds[r].first.subset == script.rounds[r].first.subset);
  }
  CHECK_THROWS(script_from_json(R"({"budgets":[2],"rounds":[
    {"first":{"advertiser":0,"bid":2,"subset":[[0,2]]},
     "second":{"advertiser":0,"bid":2,"subset":[[0,2]]}}]})"));
}

TEST_CASE("enumeration budget is enforced") {
  auto cfg = PanocsConfig::make(PanocsVariant::kWarmup);
  CHECK_THROWS_AS(selection_probability_exact(cfg, chain_script(4), 0, 0, 100),
                  std::runtime_error);
}
