#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "adwords/instance.hpp"
#include "adwords/params.hpp"
#include "adwords/rational.hpp"

namespace adwords {

/// Source of randomness for the selectors. Every draw is an explicit
/// discrete distribution with exact rational weights, so the same selector
/// code runs against a seeded stream in production and against the
/// exhaustive enumerator in verification.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  /// Outcome index distributed per `weights` (which sum to 1).
  virtual std::size_t draw(const std::vector<Rat>& weights) = 0;

  bool coin();                    // fair bit
  bool bernoulli(const Rat& p);   // true with probability p
  std::size_t uniform(std::size_t n);
};

class SeededSource : public RandomSource {
 public:
  explicit SeededSource(std::uint64_t seed) : rng_(seed) {}
  std::size_t draw(const std::vector<Rat>& weights) override;

 private:
  SplitMix64 rng_;
};

/// One candidate of a randomized round: advertiser, its panoramic subset
/// preview, the bid, and the advertiser's budget (for the large/small split).
struct RoundCandidate {
  int advertiser = -1;
  SubsetOfCircle subset;
  Value bid = 0;
  Value budget = 0;
  bool large() const { return is_large_bid(bid, budget); }
};

struct RoundPair {
  RoundCandidate first;
  RoundCandidate second;
};

/// Realized perfectly-negatively-correlated pairs, for structural checks.
struct RealizedArc {
  int from_round = -1;
  int to_round = -1;
  int advertiser = -1;
};

/// Second-level partition cell of the general-bid variant.
struct GroupInfo {
  int advertiser = 0;
  int j = 0;  // first-level index
  int k = 0;  // partner's first-level index at arrival
  std::vector<int> rounds;
};

enum class PanocsVariant { kIndependent, kWarmup, kLargeBid, kGeneralBid };

PanocsVariant variant_from_string(const std::string& name);
std::string variant_to_string(PanocsVariant variant);

struct PanocsConfig {
  PanocsVariant variant = PanocsVariant::kIndependent;
  Rat sender_p;   // defaulted per variant when zero
  int kmax = 20;  // general-bid slot range only

  static PanocsConfig make(PanocsVariant variant, int kmax = 20);
};

/// The gamma each variant certifies, as frozen in the tables
/// (1/64 warmup, 0.05144 large, 0.01245/kmax general, 0 independent).
Rat variant_gamma(const PanocsConfig& config);

/// Online selection contract: one call per randomized round, in arrival
/// order; returns 1 or 2. Value-semantic state so the enumerator can fork.
class Selector {
 public:
  virtual ~Selector() = default;
  virtual int select(const RoundPair& pair, RandomSource& rng) = 0;

  const std::vector<int>& selections() const { return selections_; }
  const std::vector<RealizedArc>& realized_arcs() const { return arcs_; }
  /// Group-level realized arcs (general-bid variant); ids are opaque.
  const std::vector<std::pair<int, int>>& realized_group_arcs() const {
    return group_arcs_;
  }
  /// Ex-ante degree tracking (large-bid variant); stays at 4 on all-large input.
  virtual int max_ex_ante_degree() const { return 0; }
  /// Nonempty first-level subsets per advertiser (general-bid variant).
  virtual std::map<int, int> first_level_subset_counts() const { return {}; }
  /// Second-level groups with members (general-bid variant).
  virtual std::vector<GroupInfo> groups() const { return {}; }
  virtual std::unique_ptr<Selector> clone() const = 0;

 protected:
  std::vector<int> selections_;
  std::vector<RealizedArc> arcs_;
  std::vector<std::pair<int, int>> group_arcs_;
};

std::unique_ptr<Selector> make_selector(const PanocsConfig& config);

/// Prior semi-assignments of one advertiser, arrival order. Returns the
/// indices (into `prior`) adjacent to `subset`: overlapping, with some
/// overlap point untouched by any later prior subset.
std::vector<int> adjacency(const std::vector<SubsetOfCircle>& prior,
                           const SubsetOfCircle& subset);

/// A scripted sequence of randomized rounds on abstract advertisers.
struct Script {
  std::vector<Value> budgets;  // advertiser index -> budget
  std::vector<RoundPair> rounds;
};

Script script_from_json(const std::string& text);
std::string script_to_json(const Script& script);

/// k semi-assignments of the whole circle to advertiser 0, each paired with
/// a fresh partner: the canonical adjacency chain.
Script chain_script(int k);

struct EnumStats {
  Rat total_weight;                 // must come out exactly 1
  std::uint64_t leaves = 0;
};

/// Exhaustively enumerates the joint randomness of the selector over the
/// script, invoking `leaf` with the completed selector and the exact
/// probability of that realization. Throws std::runtime_error when the
/// number of leaves exceeds `leaf_budget`.
EnumStats enumerate_selector(
    const PanocsConfig& config, const Script& script,
    const std::function<void(const Selector&, const Rat&)>& leaf,
    std::uint64_t leaf_budget = (1ull << 28));

/// Exact P[point y of `advertiser` is assigned at least once], i.e. some
/// round semi-assigning a subset containing y selects that advertiser.
Rat selection_probability_exact(const PanocsConfig& config,
                                const Script& script, int advertiser,
                                Value point,
                                std::uint64_t leaf_budget = (1ull << 28));

/// Exact per-round marginals P[selection == first].
std::vector<Rat> selection_marginals_exact(
    const PanocsConfig& config, const Script& script,
    std::uint64_t leaf_budget = (1ull << 28));

/// Exact P[no realized arc between consecutive rounds among the first m
/// chain rounds w.r.t. advertiser 0] -- the f_m of the warmup recurrence.
Rat chain_no_arc_probability(const PanocsConfig& config, int chain_len, int m,
                             std::uint64_t leaf_budget = (1ull << 28));

}  // namespace adwords
