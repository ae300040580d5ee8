#include "adwords/allocators.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace adwords {

Algo algo_from_string(const std::string& name) {
  if (name == "greedy") return Algo::kGreedy;
  if (name == "msvv") return Algo::kMsvv;
  if (name == "basic") return Algo::kBasic;
  if (name == "hybrid") return Algo::kHybrid;
  if (name == "independent") return Algo::kIndependent;
  throw std::runtime_error("unknown algorithm: " + name);
}

std::string algo_to_string(Algo algo) {
  switch (algo) {
    case Algo::kGreedy: return "greedy";
    case Algo::kMsvv: return "msvv";
    case Algo::kBasic: return "basic";
    case Algo::kHybrid: return "hybrid";
    case Algo::kIndependent: return "independent";
  }
  return "?";
}

namespace {

Side side_of(Value y, Value half) { return y < half ? Side::kLeft : Side::kRight; }

// Sum of length * f(segment, side) over the subset, splitting exactly at
// B/2 when the table distinguishes sides.
template <typename F>
Rat integrate_subset(const AdvertiserPanorama& pano,
                     const SubsetOfCircle& subset, bool split_half, F&& f) {
  Rat total(0);
  const Value half = pano.budget() / 2;
  for (const Interval& iv : subset.parts()) {
    for (const Segment& seg : pano.segments()) {
      Value lo = std::max(iv.start, seg.start);
      Value hi = std::min(iv.end, seg.end);
      if (lo >= hi) continue;
      if (split_half && lo < half && half < hi) {
        total += Rat(half - lo) * f(seg, Side::kLeft);
        total += Rat(hi - half) * f(seg, Side::kRight);
      } else {
        total += Rat(hi - lo) * f(seg, side_of(lo, half));
      }
    }
  }
  return total;
}

struct Offers {
  Rat semi;
  Rat det;
  Rat alpha_semi;
  Rat alpha_det;
  Rat px_semi;
  Rat px_det;
};

Offers compute_offers(const AnyTable& table, const AdvertiserPanorama& pano,
                      const SubsetOfCircle& preview, Value bid, Value budget) {
  Offers o;
  if (std::holds_alternative<BasicTable>(table)) {
    const BasicTable& t = std::get<BasicTable>(table);
    o.semi = integrate_subset(pano, preview, false,
                              [&](const Segment& s, Side) { return t.dbeta(s.k + 1); });
    o.det = integrate_subset(pano, preview, false, [&](const Segment& s, Side) {
      return t.dbeta_tail(s.k + 1);
    });
    o.alpha_semi = integrate_subset(pano, preview, false, [&](const Segment& s, Side) {
      return t.dalpha(s.k + 1);
    });
    o.alpha_det = integrate_subset(pano, preview, false, [&](const Segment& s, Side) {
      return t.dalpha_tail(s.k + 1);
    });
    o.px_semi = o.semi + o.alpha_semi;
    o.px_det = o.det + o.alpha_det;
    return o;
  }
  const HybridTable& t = std::get<HybridTable>(table);
  const BidClass cls = is_large_bid(bid, budget) ? BidClass::kLarge : BidClass::kSmall;
  o.semi = integrate_subset(pano, preview, true, [&](const Segment& s, Side side) {
    return t.dbeta_semi(side, cls, s.k + 1);
  });
  o.det = integrate_subset(pano, preview, true, [&](const Segment& s, Side side) {
    return t.dbeta_det(side, s.k + 1);
  });
  o.alpha_semi = integrate_subset(pano, preview, true, [&](const Segment& s, Side side) {
    return t.dalpha_semi(side, s.k + 1);
  });
  o.alpha_det = integrate_subset(pano, preview, true, [&](const Segment& s, Side side) {
    return t.dalpha_det(side, s.k + 1);
  });
  o.px_semi = integrate_subset(pano, preview, true, [&](const Segment& s, Side side) {
    return t.dx_semi(side, cls, s.k + 1);
  });
  o.px_det = integrate_subset(pano, preview, true, [&](const Segment& s, Side side) {
    return t.dx_det(side, s.k + 1);
  });
  return o;
}

// Shared ledger/panorama state for a primal-dual run or replay.
struct PdState {
  explicit PdState(const Instance& instance, const AnyTable& table)
      : instance(&instance), table(&table) {
    for (const auto& adv : instance.advertisers)
      panoramas.emplace_back(adv.budget);
    ledger.alpha.assign(static_cast<std::size_t>(instance.num_advertisers()),
                        Rat(0));
    ledger.beta.assign(static_cast<std::size_t>(instance.num_impressions()),
                       Rat(0));
    realized.resize(static_cast<std::size_t>(instance.num_advertisers()));
    assigned_bid_sum.assign(
        static_cast<std::size_t>(instance.num_advertisers()), 0);
  }

  const Instance* instance;
  const AnyTable* table;
  std::vector<AdvertiserPanorama> panoramas;
  DualLedger ledger;
  std::vector<SubsetOfCircle> realized;
  std::vector<Value> assigned_bid_sum;

  bool hybrid() const { return std::holds_alternative<HybridTable>(*table); }

  void apply_semi_commit(int adv, const SubsetOfCircle& subset, Value bid,
                         const Offers& offers, int impression, bool selected) {
    auto a = static_cast<std::size_t>(adv);
    ledger.alpha[a] += offers.alpha_semi;
    ledger.beta[static_cast<std::size_t>(impression)] += offers.semi;
    ledger.pbar += offers.px_semi;
    ledger.dual += offers.px_semi;
    panoramas[a].commit(
        subset, CommitKind::kSemi,
        is_large_bid(bid, instance->advertisers[a].budget));
    if (selected) {
      realized[a] = realized[a].unite(subset);
      assigned_bid_sum[a] =
          std::min(instance->advertisers[a].budget, assigned_bid_sum[a] + bid);
    }
  }

  void apply_det_commit(int adv, const SubsetOfCircle& subset, Value bid,
                        const Offers& offers, int impression) {
    auto a = static_cast<std::size_t>(adv);
    ledger.alpha[a] += offers.alpha_det;
    ledger.beta[static_cast<std::size_t>(impression)] += offers.det;
    ledger.pbar += offers.px_det;
    ledger.dual += offers.px_det;
    panoramas[a].commit(subset, CommitKind::kDeterministic);
    realized[a] = realized[a].unite(subset);
    assigned_bid_sum[a] =
        std::min(instance->advertisers[a].budget, assigned_bid_sum[a] + bid);
  }

  void apply_fallback(int adv, Value bid) {
    auto a = static_cast<std::size_t>(adv);
    assigned_bid_sum[a] =
        std::min(instance->advertisers[a].budget, assigned_bid_sum[a] + bid);
  }

  Value realized_payment() const {
    Value total = 0;
    for (Value v : assigned_bid_sum) total += v;
    return total;
  }
  Value panorama_payment() const {
    Value total = 0;
    for (const auto& r : realized) total += r.measure();
    return total;
  }
};

void check_step_invariants(const PdState& state) {
  if (state.ledger.pbar != state.ledger.dual)
    throw std::logic_error("ledger invariant broken: Pbar != D");
  if (state.realized_payment() < state.panorama_payment())
    throw std::logic_error("realized payment below panorama payment");
}

RunTrace finish_trace(PdState& state, RunTrace trace) {
  trace.ledger = state.ledger;
  trace.realized_payment = state.realized_payment();
  trace.panorama_payment = state.panorama_payment();
  for (const auto& pano : state.panoramas)
    trace.panorama_dumps.push_back(pano.dump());
  return trace;
}

}  // namespace

RunTrace run_primal_dual(const Instance& instance,
                         const AllocatorConfig& config, std::uint64_t seed) {
  if (std::holds_alternative<HybridTable>(config.table)) {
    for (const auto& adv : instance.advertisers)
      if (adv.budget % 2 != 0)
        throw std::runtime_error(
            "hybrid allocator needs even budgets (the value grid must "
            "resolve B/2); rescale the instance: advertiser " +
            adv.id);
  }
  PdState state(instance, config.table);
  PanocsConfig pc = PanocsConfig::make(config.variant, config.panocs_kmax);
  std::unique_ptr<Selector> selector = make_selector(pc);
  SeededSource rng(seed);

  RunTrace trace;
  trace.algo = config.algo;
  trace.variant = config.variant;
  trace.seed = seed;

  const int num_adv = instance.num_advertisers();
  for (int i = 0; i < instance.num_impressions(); ++i) {
    std::vector<SubsetOfCircle> previews(static_cast<std::size_t>(num_adv));
    std::vector<Offers> offers(static_cast<std::size_t>(num_adv));
    for (int a = 0; a < num_adv; ++a) {
      Value bid = instance.bid(a, i);
      if (bid == 0) continue;
      auto ai = static_cast<std::size_t>(a);
      previews[ai] = state.panoramas[ai].next_subset(bid);
      offers[ai] = compute_offers(config.table, state.panoramas[ai],
                                  previews[ai], bid,
                                  instance.advertisers[ai].budget);
    }
    // Shortlist over positive-bid advertisers: top-2 randomized offers and
    // top-1 deterministic offer, ties to the lowest index. Zero offers stay
    // in the shortlist (the N-set charging bound beta_i >= 2 Delta_a^R needs
    // the top-2 sum even when the second offer is zero).
    int a1 = -1, a2 = -1, astar = -1;
    bool any_positive = false;
    for (int a = 0; a < num_adv; ++a) {
      auto ai = static_cast<std::size_t>(a);
      if (instance.bid(a, i) == 0) continue;
      any_positive = any_positive || offers[ai].semi.sign() > 0 ||
                     offers[ai].det.sign() > 0;
      if (a1 < 0 || offers[ai].semi > offers[static_cast<std::size_t>(a1)].semi)
        a2 = a1, a1 = a;
      else if (a2 < 0 ||
               offers[ai].semi > offers[static_cast<std::size_t>(a2)].semi)
        a2 = a;
      if (astar < 0 ||
          offers[ai].det > offers[static_cast<std::size_t>(astar)].det)
        astar = a;
    }

    AssignmentRecord rec;
    rec.impression = i;
    bool randomized =
        any_positive && a1 >= 0 && a2 >= 0 &&
        offers[static_cast<std::size_t>(a1)].semi +
                offers[static_cast<std::size_t>(a2)].semi >=
            offers[static_cast<std::size_t>(astar)].det;
    if (randomized) {
      auto i1 = static_cast<std::size_t>(a1);
      auto i2 = static_cast<std::size_t>(a2);
      RoundPair pair;
      pair.first = {a1, previews[i1], instance.bid(a1, i),
                    instance.advertisers[i1].budget};
      pair.second = {a2, previews[i2], instance.bid(a2, i),
                     instance.advertisers[i2].budget};
      int sel = selector->select(pair, rng);
      rec.kind = AssignmentRecord::Kind::kRandomized;
      rec.first = {a1, previews[i1], instance.bid(a1, i)};
      rec.second = {a2, previews[i2], instance.bid(a2, i)};
      rec.selected = sel;
      state.apply_semi_commit(a1, previews[i1], instance.bid(a1, i), offers[i1],
                              i, sel == 1);
      state.apply_semi_commit(a2, previews[i2], instance.bid(a2, i), offers[i2],
                              i, sel == 2);
    } else if (any_positive && astar >= 0) {
      // Covers the forced case of a single bidding advertiser.
      auto ai = static_cast<std::size_t>(astar);
      rec.kind = AssignmentRecord::Kind::kDeterministic;
      rec.first = {astar, previews[ai], instance.bid(astar, i)};
      state.apply_det_commit(astar, previews[ai], instance.bid(astar, i),
                             offers[ai], i);
    } else {
      // All offers zero (possible under truncated tables): greedy fallback,
      // payment only, no ledger or panorama change.
      int best = -1;
      Value best_marginal = 0;
      for (int a = 0; a < num_adv; ++a) {
        auto ai = static_cast<std::size_t>(a);
        Value marginal =
            std::min(instance.bid(a, i), instance.advertisers[ai].budget -
                                             state.assigned_bid_sum[ai]);
        if (marginal > best_marginal) {
          best_marginal = marginal;
          best = a;
        }
      }
      if (best >= 0) {
        rec.kind = AssignmentRecord::Kind::kDeterministic;
        rec.fallback = true;
        rec.first = {best, {}, instance.bid(best, i)};
        state.apply_fallback(best, instance.bid(best, i));
      } else {
        rec.kind = AssignmentRecord::Kind::kUnassigned;
      }
    }
    trace.records.push_back(std::move(rec));
    check_step_invariants(state);
  }
  return finish_trace(state, std::move(trace));
}

RunTrace run_greedy(const Instance& instance) {
  RunTrace trace;
  trace.algo = Algo::kGreedy;
  std::vector<Value> spent(static_cast<std::size_t>(instance.num_advertisers()),
                           0);
  trace.ledger.alpha.assign(
      static_cast<std::size_t>(instance.num_advertisers()), Rat(0));
  trace.ledger.beta.assign(
      static_cast<std::size_t>(instance.num_impressions()), Rat(0));
  for (int i = 0; i < instance.num_impressions(); ++i) {
    int best = -1;
    Value best_marginal = 0;
    for (int a = 0; a < instance.num_advertisers(); ++a) {
      auto ai = static_cast<std::size_t>(a);
      Value marginal = std::min(instance.bid(a, i),
                                instance.advertisers[ai].budget - spent[ai]);
      if (marginal > best_marginal) {
        best_marginal = marginal;
        best = a;
      }
    }
    AssignmentRecord rec;
    rec.impression = i;
    if (best >= 0) {
      rec.kind = AssignmentRecord::Kind::kDeterministic;
      rec.first = {best, {}, instance.bid(best, i)};
      spent[static_cast<std::size_t>(best)] += best_marginal;
      trace.realized_payment += best_marginal;
    }
    trace.records.push_back(std::move(rec));
  }
  // A deterministic run realizes the panorama objective exactly
  // (leftmost-interval assignment).
  trace.panorama_payment = trace.realized_payment;
  return trace;
}

Rat msvv_alpha(const Rat& y) {
  if (y <= Rat(1, 2)) return Rat(4, 9) * y;
  return Rat(2, 3) * y - Rat(1, 9);
}

Rat msvv_beta(const Rat& y) { return y - msvv_alpha(y); }

RunTrace run_msvv(const Instance& instance) {
  RunTrace trace;
  trace.algo = Algo::kMsvv;
  const int num_adv = instance.num_advertisers();
  std::vector<Value> spent(static_cast<std::size_t>(num_adv), 0);
  trace.ledger.alpha.assign(static_cast<std::size_t>(num_adv), Rat(0));
  trace.ledger.beta.assign(
      static_cast<std::size_t>(instance.num_impressions()), Rat(0));
  for (int i = 0; i < instance.num_impressions(); ++i) {
    int best = -1;
    Rat best_offer(0);
    Value best_after = 0;
    for (int a = 0; a < num_adv; ++a) {
      auto ai = static_cast<std::size_t>(a);
      Value bid = instance.bid(a, i);
      if (bid == 0) continue;
      const Value budget = instance.advertisers[ai].budget;
      if (2 * bid > budget) trace.small_bid_warning = true;
      Value after = std::min(budget, spent[ai] + bid);
      Rat offer = Rat(budget) * (msvv_beta(Rat(after, budget)) -
                                 msvv_beta(Rat(spent[ai], budget)));
      if (offer.sign() > 0 && (best < 0 || offer > best_offer)) {
        best = a;
        best_offer = offer;
        best_after = after;
      }
    }
    AssignmentRecord rec;
    rec.impression = i;
    if (best >= 0) {
      auto ai = static_cast<std::size_t>(best);
      const Value budget = instance.advertisers[ai].budget;
      Value gain = best_after - spent[ai];
      trace.ledger.alpha[ai] = Rat(budget) * msvv_alpha(Rat(best_after, budget));
      trace.ledger.beta[static_cast<std::size_t>(i)] = best_offer;
      spent[ai] = best_after;
      trace.realized_payment += gain;
      rec.kind = AssignmentRecord::Kind::kDeterministic;
      rec.first = {best, {}, instance.bid(best, i)};
    }
    trace.records.push_back(std::move(rec));
  }
  trace.ledger.pbar = Rat(trace.realized_payment);
  trace.ledger.dual = Rat(0);
  for (const Rat& a : trace.ledger.alpha) trace.ledger.dual += a;
  for (const Rat& b : trace.ledger.beta) trace.ledger.dual += b;
  if (trace.ledger.pbar != trace.ledger.dual)
    throw std::logic_error("msvv ledger drift: P != D");
  trace.panorama_payment = trace.realized_payment;
  return trace;
}

RunTrace run_algo(const Instance& instance, const AllocatorConfig& config,
                  std::uint64_t seed) {
  switch (config.algo) {
    case Algo::kGreedy: return run_greedy(instance);
    case Algo::kMsvv: return run_msvv(instance);
    default: return run_primal_dual(instance, config, seed);
  }
}

Rat reconstruct_alpha(const AdvertiserPanorama& panorama,
                      const AnyTable& table) {
  if (std::holds_alternative<BasicTable>(table)) {
    const BasicTable& t = std::get<BasicTable>(table);
    Rat total(0);
    for (const Segment& seg : panorama.segments()) {
      Rat point = seg.deterministic ? t.alpha_total() : t.alpha_prefix(seg.k);
      total += Rat(seg.length()) * point;
    }
    return total;
  }
  const HybridTable& t = std::get<HybridTable>(table);
  auto point_alpha = [&](const Segment& seg, Side side) {
    Rat v(0);
    for (int l = 1; l <= seg.k; ++l) v += t.dalpha_semi(side, l);
    if (seg.deterministic) v += t.dalpha_det(side, seg.k + 1);
    return v;
  };
  SubsetOfCircle whole = SubsetOfCircle::single(0, panorama.budget());
  return integrate_subset(panorama, whole, true, point_alpha);
}

FeasibilityResult dual_feasibility_check(const Instance& instance,
                                         const std::vector<Rat>& alpha,
                                         const std::vector<Rat>& beta,
                                         const Rat& big_gamma) {
  const int n = instance.num_impressions();
  if (n > 20)
    throw std::runtime_error("dual feasibility enumeration limited to 20 "
                             "impressions");
  if (big_gamma.sign() <= 0)
    throw std::runtime_error("dual feasibility needs Gamma > 0");
  FeasibilityResult result;
  bool first = true;
  for (int a = 0; a < instance.num_advertisers(); ++a) {
    const Value budget = instance.advertisers[static_cast<std::size_t>(a)].budget;
    // Gray-code walk: one impression flips per step.
    Rat beta_sum(0);
    Value bid_sum = 0;
    std::uint32_t gray = 0;
    auto consider = [&](std::uint32_t g) {
      Value payment = std::min(bid_sum, budget);
      Rat slack = alpha[static_cast<std::size_t>(a)] + beta_sum -
                  big_gamma * Rat(payment);
      if (first || slack < result.min_slack) {
        first = false;
        result.min_slack = slack;
        result.argmin_advertiser = a;
        result.argmin_subset.clear();
        for (int i = 0; i < n; ++i)
          if (g & (1u << i)) result.argmin_subset.push_back(i);
      }
    };
    consider(0);
    for (std::uint32_t step = 1; step < (1u << n); ++step) {
      int flip = std::countr_zero(step);
      std::uint32_t bit = 1u << flip;
      gray ^= bit;
      if (gray & bit) {
        beta_sum += beta[static_cast<std::size_t>(flip)];
        bid_sum += instance.bid(a, flip);
      } else {
        beta_sum -= beta[static_cast<std::size_t>(flip)];
        bid_sum -= instance.bid(a, flip);
      }
      consider(gray);
    }
  }
  return result;
}

Rat msvv_feasibility_min_slack(int grid_steps) {
  const Rat gamma_target(5, 9);
  Rat worst;
  bool first = true;
  for (int s = 0; s <= grid_steps; ++s) {
    Rat b(s, grid_steps);
    Rat slack;
    if (b <= Rat(1, 2))
      slack = Rat(3) * msvv_alpha(b) - Rat(2) * msvv_alpha(b + Rat(1, 2)) +
              Rat(1) - gamma_target;
    else
      slack = Rat(3) * msvv_alpha(b) - Rat(2) * msvv_alpha(Rat(1)) +
              Rat(2) * (Rat(1) - b) - gamma_target;
    if (first || slack < worst) {
      worst = slack;
      first = false;
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Trace dump and certification
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json subset_json(const SubsetOfCircle& s) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const Interval& iv : s.parts()) arr.push_back({iv.start, iv.end});
  return arr;
}

SubsetOfCircle subset_from_json(const nlohmann::json& arr) {
  std::vector<Interval> parts;
  for (const auto& iv : arr)
    parts.push_back({iv.at(0).get<Value>(), iv.at(1).get<Value>()});
  return SubsetOfCircle(std::move(parts));
}

nlohmann::ordered_json candidate_json(const Instance& instance,
                                      const AssignmentRecord::Candidate& c) {
  return {{"advertiser",
           instance.advertisers[static_cast<std::size_t>(c.advertiser)].id},
          {"bid", c.bid},
          {"subset", subset_json(c.subset)}};
}

}  // namespace

std::string trace_to_json(const Instance& instance, const AnyTable* table,
                          const RunTrace& trace) {
  nlohmann::ordered_json j;
  j["algo"] = algo_to_string(trace.algo);
  j["variant"] = variant_to_string(trace.variant);
  j["seed"] = trace.seed;
  j["instance"] = nlohmann::ordered_json::parse(serialize_instance(instance));
  if (table != nullptr) {
    std::string table_text = std::holds_alternative<BasicTable>(*table)
                                 ? table_to_json(std::get<BasicTable>(*table))
                                 : table_to_json(std::get<HybridTable>(*table));
    j["table"] = nlohmann::ordered_json::parse(table_text);
  }
  j["impressions"] = nlohmann::ordered_json::array();
  for (const AssignmentRecord& rec : trace.records) {
    nlohmann::ordered_json r;
    r["id"] =
        instance.impressions[static_cast<std::size_t>(rec.impression)].id;
    switch (rec.kind) {
      case AssignmentRecord::Kind::kUnassigned: r["kind"] = "unassigned"; break;
      case AssignmentRecord::Kind::kDeterministic:
        r["kind"] = "deterministic";
        r["first"] = candidate_json(instance, rec.first);
        if (rec.fallback) r["fallback"] = true;
        break;
      case AssignmentRecord::Kind::kRandomized:
        r["kind"] = "randomized";
        r["first"] = candidate_json(instance, rec.first);
        r["second"] = candidate_json(instance, rec.second);
        r["selected"] = rec.selected;
        break;
    }
    if (rec.kind != AssignmentRecord::Kind::kUnassigned)
      r["beta"] =
          trace.ledger.beta[static_cast<std::size_t>(rec.impression)].to_string();
    j["impressions"].push_back(std::move(r));
  }
  j["advertisers"] = nlohmann::ordered_json::array();
  for (int a = 0; a < instance.num_advertisers(); ++a) {
    j["advertisers"].push_back(
        {{"id", instance.advertisers[static_cast<std::size_t>(a)].id},
         {"alpha", trace.ledger.alpha[static_cast<std::size_t>(a)].to_string()},
         {"panorama", trace.panorama_dumps.empty()
                          ? ""
                          : trace.panorama_dumps[static_cast<std::size_t>(a)]}});
  }
  j["totals"] = {{"P", trace.realized_payment},
                 {"panorama", trace.panorama_payment},
                 {"Pbar", trace.ledger.pbar.to_string()},
                 {"D", trace.ledger.dual.to_string()}};
  return j.dump(2) + "\n";
}

CertifyResult certify_trace(const std::string& trace_json,
                            const std::optional<Rat>& gamma_override) {
  CertifyResult result;
  auto fail = [&](const std::string& msg) {
    result.ok = false;
    result.failures.push_back(msg);
  };
  auto j = nlohmann::json::parse(trace_json);
  std::istringstream instance_stream(j.at("instance").dump());
  Instance instance = load_instance(instance_stream);

  // Deterministic algorithms replay without a table: rerun and compare.
  std::string algo_name = j.at("algo").get<std::string>();
  if (algo_name == "greedy" || algo_name == "msvv") {
    RunTrace rerun = algo_name == "greedy" ? run_greedy(instance)
                                           : run_msvv(instance);
    const auto& totals = j.at("totals");
    if (rerun.realized_payment != totals.at("P").get<Value>())
      fail("realized payment mismatch on deterministic replay");
    if (rerun.ledger.pbar != rerun.ledger.dual && algo_name == "msvv")
      fail("msvv P != D on replay");
    return result;
  }

  std::string table_text = j.at("table").dump();
  AnyTable table;
  if (json_table_is_hybrid(table_text))
    table = hybrid_table_from_json(table_text);
  else
    table = basic_table_from_json(table_text);

  PdState state(instance, table);
  const auto& imps = j.at("impressions");
  for (std::size_t t = 0; t < imps.size(); ++t) {
    const auto& r = imps[t];
    int i = static_cast<int>(t);
    std::string kind = r.at("kind").get<std::string>();
    if (kind == "unassigned") continue;
    auto parse_candidate = [&](const nlohmann::json& c) {
      AssignmentRecord::Candidate cand;
      cand.advertiser =
          instance.advertiser_index(c.at("advertiser").get<std::string>());
      if (cand.advertiser < 0) throw std::runtime_error("unknown advertiser");
      cand.bid = c.at("bid").get<Value>();
      cand.subset = subset_from_json(c.at("subset"));
      return cand;
    };
    if (kind == "deterministic" && r.value("fallback", false)) {
      auto cand = parse_candidate(r.at("first"));
      state.apply_fallback(cand.advertiser, cand.bid);
      continue;
    }
    if (kind == "deterministic") {
      auto cand = parse_candidate(r.at("first"));
      auto a = static_cast<std::size_t>(cand.advertiser);
      SubsetOfCircle preview = state.panoramas[a].next_subset(cand.bid);
      if (!(preview == cand.subset))
        fail("impression " + std::to_string(i) +
             ": recorded subset is not the panoramic preview");
      Offers offers = compute_offers(table, state.panoramas[a], cand.subset,
                                     cand.bid, instance.advertisers[a].budget);
      state.apply_det_commit(cand.advertiser, cand.subset, cand.bid, offers, i);
    } else if (kind == "randomized") {
      auto c1 = parse_candidate(r.at("first"));
      auto c2 = parse_candidate(r.at("second"));
      int sel = r.at("selected").get<int>();
      if (c1.advertiser == c2.advertiser) {
        fail("impression " + std::to_string(i) + ": identical candidates");
        continue;
      }
      for (const auto* c : {&c1, &c2}) {
        auto a = static_cast<std::size_t>(c->advertiser);
        SubsetOfCircle preview = state.panoramas[a].next_subset(c->bid);
        if (!(preview == c->subset))
          fail("impression " + std::to_string(i) +
               ": recorded subset is not the panoramic preview");
      }
      auto a1 = static_cast<std::size_t>(c1.advertiser);
      auto a2 = static_cast<std::size_t>(c2.advertiser);
      Offers o1 = compute_offers(table, state.panoramas[a1], c1.subset, c1.bid,
                                 instance.advertisers[a1].budget);
      Offers o2 = compute_offers(table, state.panoramas[a2], c2.subset, c2.bid,
                                 instance.advertisers[a2].budget);
      state.apply_semi_commit(c1.advertiser, c1.subset, c1.bid, o1, i, sel == 1);
      state.apply_semi_commit(c2.advertiser, c2.subset, c2.bid, o2, i, sel == 2);
    } else {
      fail("unknown record kind: " + kind);
    }
    if (state.ledger.pbar != state.ledger.dual)
      fail("Pbar != D after impression " + std::to_string(i));
  }

  // Totals must match the dump bit-exactly.
  const auto& totals = j.at("totals");
  if (state.realized_payment() != totals.at("P").get<Value>())
    fail("realized payment mismatch");
  if (state.panorama_payment() != totals.at("panorama").get<Value>())
    fail("panorama payment mismatch");
  if (state.ledger.pbar != Rat::parse(totals.at("Pbar").get<std::string>()))
    fail("Pbar mismatch");
  if (state.ledger.dual != Rat::parse(totals.at("D").get<std::string>()))
    fail("D mismatch");
  if (state.realized_payment() < state.panorama_payment())
    fail("P < panorama payment");
  for (int a = 0; a < instance.num_advertisers(); ++a) {
    auto ai = static_cast<std::size_t>(a);
    if (reconstruct_alpha(state.panoramas[ai], table) != state.ledger.alpha[ai])
      fail("alpha reconstruction mismatch for advertiser " +
           instance.advertisers[ai].id);
  }
  Rat gamma_target = gamma_override.value_or(
      std::holds_alternative<BasicTable>(table)
          ? std::get<BasicTable>(table).big_gamma()
          : std::get<HybridTable>(table).big_gamma);
  if (instance.num_impressions() <= 20) {
    FeasibilityResult feas = dual_feasibility_check(
        instance, state.ledger.alpha, state.ledger.beta, gamma_target);
    if (feas.min_slack.sign() < 0)
      fail("dual feasibility violated: min slack " +
           feas.min_slack.to_string());
  } else {
    result.failures.push_back(
        "note: dual feasibility skipped (more than 20 impressions)");
  }
  return result;
}

}  // namespace adwords
