#include "adwords/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>
#include <sstream>
#include <stdexcept>

namespace adwords {

namespace {

struct BruteState {
  const Instance* instance;
  std::vector<Value> spent;
  std::vector<int> assignment;
  std::vector<Value> best_assignable;  // max marginal bid per impression
  Value best = 0;
  std::vector<int> best_assignment;

  void search(int i, Value value) {
    if (i == instance->num_impressions()) {
      if (value > best) {
        best = value;
        best_assignment = assignment;
      }
      return;
    }
    // Upper bound on what the remaining impressions can add.
    Value slack_bound = value;
    for (int r = i; r < instance->num_impressions(); ++r)
      slack_bound += best_assignable[static_cast<std::size_t>(r)];
    if (slack_bound <= best) return;
    for (int a = 0; a < instance->num_advertisers(); ++a) {
      auto ai = static_cast<std::size_t>(a);
      Value marginal =
          std::min(instance->bid(a, i),
                   instance->advertisers[ai].budget - spent[ai]);
      if (marginal <= 0) continue;
      spent[ai] += marginal;
      assignment[static_cast<std::size_t>(i)] = a;
      search(i + 1, value + marginal);
      spent[ai] -= marginal;
      assignment[static_cast<std::size_t>(i)] = -1;
    }
    search(i + 1, value);  // leave unassigned
  }
};

}  // namespace

OptResult offline_opt(const Instance& instance,
                      std::optional<std::pair<Rat, Rat>> dual_and_gamma,
                      double node_budget) {
  double nodes = 1.0;
  for (int i = 0; i < instance.num_impressions(); ++i)
    nodes *= instance.num_advertisers() + 1;
  if (nodes > node_budget) {
    if (!dual_and_gamma.has_value())
      throw std::runtime_error(
          "offline optimum enumeration budget exceeded and no dual bound "
          "available");
    const auto& [dual, big_gamma] = *dual_and_gamma;
    if (big_gamma.sign() <= 0)
      throw std::runtime_error("dual bound needs Gamma > 0");
    OptResult result;
    result.method = OptResult::Method::kBound;
    Rat bound = dual / big_gamma;
    // Round the rational bound up to the value grid.
    BigInt q, r;
    BigInt::divmod(bound.num(), bound.den(), q, r);
    result.value = q.to_int64() + (r.is_zero() ? 0 : 1);
    return result;
  }
  BruteState state;
  state.instance = &instance;
  state.spent.assign(static_cast<std::size_t>(instance.num_advertisers()), 0);
  state.assignment.assign(static_cast<std::size_t>(instance.num_impressions()),
                          -1);
  for (int i = 0; i < instance.num_impressions(); ++i) {
    Value top = 0;
    for (int a = 0; a < instance.num_advertisers(); ++a)
      top = std::max(top, instance.bid(a, i));
    state.best_assignable.push_back(top);
  }
  state.best_assignment = state.assignment;
  state.search(0, 0);
  OptResult result;
  result.value = state.best;
  result.assignment = state.best_assignment;
  result.method = OptResult::Method::kBrute;
  return result;
}

bool dual_upper_bound_sanity(const OptResult& opt, const Rat& dual,
                             const Rat& big_gamma) {
  if (big_gamma.sign() <= 0) return false;
  return Rat(opt.value) <= dual / big_gamma;
}

RatioEstimate estimate_ratio(const Instance& instance,
                             const AllocatorConfig& config, int trials,
                             std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::runtime_error("trials must be >= 1");
  OptResult opt = offline_opt(instance);
  RatioEstimate est;
  est.trials = trials;
  est.seed = seed;
  est.opt = static_cast<double>(opt.value);
  SplitMix64 seeder(seed);
  std::vector<std::uint64_t> trial_seeds(static_cast<std::size_t>(trials));
  for (auto& s : trial_seeds) s = seeder.next();
  std::vector<Value> payments(static_cast<std::size_t>(trials), 0);
  std::vector<Value> panoramas(static_cast<std::size_t>(trials), 0);
  auto worker = [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      RunTrace trace =
          run_algo(instance, config, trial_seeds[static_cast<std::size_t>(t)]);
      payments[static_cast<std::size_t>(t)] = trace.realized_payment;
      panoramas[static_cast<std::size_t>(t)] = trace.panorama_payment;
    }
  };
  jobs = std::max(1, std::min(jobs, trials));
  if (jobs == 1) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    int chunk = (trials + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back(worker, w * chunk,
                        std::min(trials, (w + 1) * chunk));
    for (auto& th : pool) th.join();
  }
  // Ordered reduction by trial index.
  double sum = 0, sumsq = 0, pano_sum = 0;
  for (int t = 0; t < trials; ++t) {
    double p = static_cast<double>(payments[static_cast<std::size_t>(t)]);
    sum += p;
    sumsq += p * p;
    pano_sum += static_cast<double>(panoramas[static_cast<std::size_t>(t)]);
  }
  est.mean_alg = sum / trials;
  est.mean_panorama = pano_sum / trials;
  est.ratio = est.opt > 0 ? est.mean_alg / est.opt : 1.0;
  double var = trials > 1 ? (sumsq - sum * sum / trials) / (trials - 1) : 0.0;
  double se = std::sqrt(std::max(0.0, var) / trials);
  if (est.opt > 0) {
    est.ci_low = (est.mean_alg - 1.96 * se) / est.opt;
    est.ci_high = (est.mean_alg + 1.96 * se) / est.opt;
  } else {
    est.ci_low = est.ci_high = 1.0;
  }
  return est;
}

namespace {

struct CoverProfile {
  int k = 0;
  int k_large = 0;  // large-bid covers before the first small-bid cover
};

CoverProfile cover_profile(const Script& script, int advertiser, Value point) {
  CoverProfile p;
  bool saw_small = false;
  for (const RoundPair& pair : script.rounds) {
    for (const RoundCandidate* c : {&pair.first, &pair.second}) {
      if (c->advertiser != advertiser || !c->subset.contains(point)) continue;
      p.k += 1;
      if (c->large()) {
        if (!saw_small) p.k_large += 1;
      } else {
        saw_small = true;
      }
    }
  }
  return p;
}

// 1 - 2^-k (1-gamma)^max(e-1, 0); the exponent counts large-bid covers for
// the large-bid variant and all covers otherwise.
Rat panocs_bound(const PanocsConfig& config, const CoverProfile& profile) {
  int exponent_base = config.variant == PanocsVariant::kLargeBid
                          ? profile.k_large
                          : profile.k;
  int e = std::max(exponent_base - 1, 0);
  Rat gamma = variant_gamma(config);
  return Rat(1) -
         Rat(BigInt(1), BigInt::pow(BigInt(2), static_cast<unsigned>(profile.k))) *
             Rat::pow(Rat(1) - gamma, static_cast<unsigned>(e));
}

std::vector<std::pair<int, Value>> query_points(const Script& script) {
  std::vector<std::pair<int, Value>> out;
  std::set<std::pair<int, Value>> seen;
  for (const RoundPair& pair : script.rounds) {
    for (const RoundCandidate* c : {&pair.first, &pair.second}) {
      for (const Interval& iv : c->subset.parts()) {
        if (seen.insert({c->advertiser, iv.start}).second)
          out.push_back({c->advertiser, iv.start});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

BoundReport verify_panocs_bound_exact(const PanocsConfig& config,
                                      const Script& script,
                                      std::uint64_t leaf_budget) {
  BoundReport report;
  for (auto [adv, point] : query_points(script)) {
    CoverProfile profile = cover_profile(script, adv, point);
    if (profile.k == 0) continue;
    BoundPoint bp;
    bp.advertiser = adv;
    bp.point = point;
    bp.k = profile.k;
    bp.k_large = profile.k_large;
    bp.bound = panocs_bound(config, profile);
    bp.exact_prob =
        selection_probability_exact(config, script, adv, point, leaf_budget);
    bp.ok = bp.exact_prob >= bp.bound;
    report.ok = report.ok && bp.ok;
    report.points.push_back(std::move(bp));
  }
  return report;
}

BoundReport verify_panocs_bound_mc(const PanocsConfig& config,
                                   const Script& script, int trials,
                                   double delta, std::uint64_t seed) {
  if (trials < 1) throw std::runtime_error("trials must be >= 1");
  if (delta <= 0 || delta >= 1)
    throw std::runtime_error("delta must be in (0, 1)");
  BoundReport report;
  auto points = query_points(script);
  std::vector<std::uint64_t> hits(points.size(), 0);
  SplitMix64 seeder(seed);
  for (int t = 0; t < trials; ++t) {
    std::unique_ptr<Selector> selector = make_selector(config);
    SeededSource rng(seeder.next());
    std::vector<int> selections;
    for (const RoundPair& pair : script.rounds)
      selections.push_back(selector->select(pair, rng));
    for (std::size_t q = 0; q < points.size(); ++q) {
      auto [adv, point] = points[q];
      for (std::size_t r = 0; r < script.rounds.size(); ++r) {
        const RoundCandidate& chosen = selections[r] == 1
                                           ? script.rounds[r].first
                                           : script.rounds[r].second;
        if (chosen.advertiser == adv && chosen.subset.contains(point)) {
          ++hits[q];
          break;
        }
      }
    }
  }
  double margin = std::sqrt(std::log(1.0 / delta) / (2.0 * trials));
  for (std::size_t q = 0; q < points.size(); ++q) {
    auto [adv, point] = points[q];
    CoverProfile profile = cover_profile(script, adv, point);
    if (profile.k == 0) continue;
    BoundPoint bp;
    bp.advertiser = adv;
    bp.point = point;
    bp.k = profile.k;
    bp.k_large = profile.k_large;
    bp.bound = panocs_bound(config, profile);
    bp.estimate = static_cast<double>(hits[q]) / trials;
    bp.margin = margin;
    bp.ok = bp.estimate >= bp.bound.to_double() - margin;
    report.ok = report.ok && bp.ok;
    report.points.push_back(std::move(bp));
  }
  return report;
}

std::string report_csv_header() {
  return "#schema=adwords-report-v1\n"
         "instance,algo,table,trials,seed,mean_alg,opt,ratio,ci_low,ci_high,"
         "guarantee,pass\n";
}

std::string report_csv_row(const std::string& instance_name,
                           const std::string& algo, const std::string& table,
                           const RatioEstimate& estimate, double guarantee) {
  std::ostringstream out;
  out.precision(9);
  out << instance_name << ',' << algo << ',' << table << ','
      << estimate.trials << ',' << estimate.seed << ',' << estimate.mean_alg
      << ',' << estimate.opt << ',' << estimate.ratio << ',' << estimate.ci_low
      << ',' << estimate.ci_high << ',' << guarantee << ','
      << (estimate.ratio >= guarantee ? "1" : "0") << '\n';
  return out.str();
}

}  // namespace adwords
