#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adwords/allocators.hpp"
#include "adwords/instance.hpp"
#include "adwords/panocs.hpp"

namespace adwords {

struct OptResult {
  enum class Method { kBrute, kBound };
  Value value = 0;
  std::vector<int> assignment;  // impression -> advertiser or -1
  Method method = Method::kBrute;
};

/// Exact offline optimum by assignment enumeration with branch-and-bound.
/// Beyond the enumeration budget: with a (D, Gamma) pair from a certified
/// run, returns the scaled dual bound D / Gamma flagged Method::kBound;
/// without one, throws.
OptResult offline_opt(const Instance& instance,
                      std::optional<std::pair<Rat, Rat>> dual_and_gamma = {},
                      double node_budget = 1e8);

/// OPT <= D / Gamma (the online primal dual upper bound).
bool dual_upper_bound_sanity(const OptResult& opt, const Rat& dual,
                             const Rat& big_gamma);

struct RatioEstimate {
  double mean_alg = 0;
  double mean_panorama = 0;
  double opt = 0;
  double ratio = 0;
  double ci_low = 0;   // 95% normal-approximation interval on mean_alg/opt
  double ci_high = 0;
  int trials = 0;
  std::uint64_t seed = 0;
};

/// Mean realized payment over `trials` seeded runs against the exact OPT.
/// Deterministic given (instance, config, trials, seed) -- per-trial seeds
/// are derived upfront, so the jobs fan-out cannot change the result.
RatioEstimate estimate_ratio(const Instance& instance,
                             const AllocatorConfig& config, int trials,
                             std::uint64_t seed, int jobs = 1);

struct BoundPoint {
  int advertiser = 0;
  Value point = 0;
  int k = 0;
  int k_large = 0;
  Rat bound;        // 1 - 2^-k (1-gamma)^max(e-1,0)
  Rat exact_prob;   // exact mode
  double estimate = 0;  // mc mode
  double margin = 0;    // one-sided Hoeffding margin
  bool ok = false;
};

struct BoundReport {
  bool ok = true;
  std::vector<BoundPoint> points;
};

/// Exact mode: enumeration, asserting prob >= bound as rationals at every
/// covered point of every advertiser.
BoundReport verify_panocs_bound_exact(const PanocsConfig& config,
                                      const Script& script,
                                      std::uint64_t leaf_budget = (1ull << 28));

/// Monte Carlo mode: estimate >= bound - sqrt(ln(1/delta) / (2 trials)),
/// one-sided Hoeffding at confidence 1 - delta.
BoundReport verify_panocs_bound_mc(const PanocsConfig& config,
                                   const Script& script, int trials,
                                   double delta, std::uint64_t seed);

std::string report_csv_header();
std::string report_csv_row(const std::string& instance_name,
                           const std::string& algo, const std::string& table,
                           const RatioEstimate& estimate, double guarantee);

}  // namespace adwords
