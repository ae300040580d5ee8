#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adwords/instance.hpp"
#include "adwords/panocs.hpp"
#include "adwords/panorama.hpp"
#include "adwords/params.hpp"

namespace adwords {

/// How one impression was (semi-)assigned.
struct AssignmentRecord {
  enum class Kind { kUnassigned, kDeterministic, kRandomized };
  struct Candidate {
    int advertiser = -1;
    SubsetOfCircle subset;
    Value bid = 0;
  };
  int impression = -1;
  Kind kind = Kind::kUnassigned;
  Candidate first, second;  // deterministic rounds use `first` only
  int selected = 0;         // randomized rounds: 1 or 2
  bool fallback = false;    // greedy fallback round (no ledger change)
};

enum class Algo { kGreedy, kMsvv, kBasic, kHybrid, kIndependent };
Algo algo_from_string(const std::string& name);
std::string algo_to_string(Algo algo);

/// Point-level dual ledger. Pbar equals dual after every round by
/// construction; both are exact rationals.
struct DualLedger {
  std::vector<Rat> alpha;  // per advertiser
  std::vector<Rat> beta;   // per impression
  Rat pbar;
  Rat dual;
};

struct RunTrace {
  Algo algo = Algo::kGreedy;
  PanocsVariant variant = PanocsVariant::kIndependent;
  std::uint64_t seed = 0;
  std::vector<AssignmentRecord> records;
  DualLedger ledger;
  Value realized_payment = 0;   // budget-additive P
  Value panorama_payment = 0;   // measure of the realized subset unions
  std::vector<std::string> panorama_dumps;
  bool small_bid_warning = false;  // msvv on a non-small-bid instance
};

using AnyTable = std::variant<BasicTable, HybridTable>;

struct AllocatorConfig {
  Algo algo = Algo::kBasic;
  AnyTable table;
  PanocsVariant variant = PanocsVariant::kIndependent;
  int panocs_kmax = 20;
};

/// Greedy: assign to the advertiser with the largest marginal payment,
/// ties to the lowest index.
RunTrace run_greedy(const Instance& instance);

/// The small-bid primal-dual algorithm with the 5/9 potential.
RunTrace run_msvv(const Instance& instance);

/// The semi-randomized primal-dual allocators (basic and hybrid tables).
RunTrace run_primal_dual(const Instance& instance,
                         const AllocatorConfig& config, std::uint64_t seed);

RunTrace run_algo(const Instance& instance, const AllocatorConfig& config,
                  std::uint64_t seed);

/// MSVV potential, alpha(y) = 4/9 y on [0,1/2], 2/3 y - 1/9 on (1/2,1].
Rat msvv_alpha(const Rat& y);
Rat msvv_beta(const Rat& y);

/// Recomputes an advertiser's alpha mass from its final panorama via the
/// alpha-invariant; must equal the incrementally maintained ledger value.
Rat reconstruct_alpha(const AdvertiserPanorama& panorama, const AnyTable& table);

struct FeasibilityResult {
  Rat min_slack;
  int argmin_advertiser = -1;
  std::vector<int> argmin_subset;
};

/// min over advertisers a and subsets S of
///   alpha_a + sum_{i in S} beta_i - Gamma * b_a(S),
/// by full subset enumeration (|I| <= 20).
FeasibilityResult dual_feasibility_check(const Instance& instance,
                                         const std::vector<Rat>& alpha,
                                         const std::vector<Rat>& beta,
                                         const Rat& big_gamma);

/// Slack of both small-bid feasibility inequalities at Gamma = 5/9 over a
/// uniform grid of b values with the given resolution.
Rat msvv_feasibility_min_slack(int grid_steps);

/// `table` may be null for the deterministic algorithms (greedy, msvv).
std::string trace_to_json(const Instance& instance, const AnyTable* table,
                          const RunTrace& trace);

struct CertifyResult {
  bool ok = true;
  std::vector<std::string> failures;
};

/// Replays a trace dump: reruns the ledger arithmetic from the recorded
/// decisions, re-asserts P >= panorama payment, Pbar == D, ledger totals
/// matching the dump, alpha reconstruction, and dual feasibility at Gamma.
CertifyResult certify_trace(const std::string& trace_json,
                            const std::optional<Rat>& gamma_override);

}  // namespace adwords
