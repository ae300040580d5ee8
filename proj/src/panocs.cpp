#include "adwords/panocs.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace adwords {

bool RandomSource::coin() {
  static const std::vector<Rat> kFair{Rat(1, 2), Rat(1, 2)};
  return draw(kFair) == 1;
}

bool RandomSource::bernoulli(const Rat& p) {
  return draw({p, Rat(1) - p}) == 0;
}

std::size_t RandomSource::uniform(std::size_t n) {
  if (n == 1) return 0;
  std::vector<Rat> w(n, Rat(1, static_cast<std::int64_t>(n)));
  return draw(w);
}

std::size_t SeededSource::draw(const std::vector<Rat>& weights) {
  if (weights.size() == 2 && weights[0] == weights[1]) return rng_.next() & 1u;
  // 53-bit uniform against the cumulative distribution.
  double u = static_cast<double>(rng_.next() >> 11) * 0x1.0p-53;
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
    cum += weights[i].to_double();
    if (u < cum) return i;
  }
  return weights.size() - 1;
}

PanocsVariant variant_from_string(const std::string& name) {
  if (name == "independent") return PanocsVariant::kIndependent;
  if (name == "warmup") return PanocsVariant::kWarmup;
  if (name == "large") return PanocsVariant::kLargeBid;
  if (name == "general") return PanocsVariant::kGeneralBid;
  throw std::runtime_error("unknown panocs variant: " + name);
}

std::string variant_to_string(PanocsVariant variant) {
  switch (variant) {
    case PanocsVariant::kIndependent: return "independent";
    case PanocsVariant::kWarmup: return "warmup";
    case PanocsVariant::kLargeBid: return "large";
    case PanocsVariant::kGeneralBid: return "general";
  }
  return "?";
}

PanocsConfig PanocsConfig::make(PanocsVariant variant, int kmax) {
  PanocsConfig c;
  c.variant = variant;
  c.kmax = kmax;
  switch (variant) {
    case PanocsVariant::kLargeBid: c.sender_p = default_large_sender_p(); break;
    case PanocsVariant::kGeneralBid:
      c.sender_p = default_general_sender_p();
      break;
    default: c.sender_p = Rat(0); break;
  }
  return c;
}

Rat variant_gamma(const PanocsConfig& config) {
  switch (config.variant) {
    case PanocsVariant::kIndependent: return Rat(0);
    case PanocsVariant::kWarmup: return Rat(1, 64);
    case PanocsVariant::kLargeBid: return frozen_large_gamma();
    case PanocsVariant::kGeneralBid:
      return Rat(1245, 100000) / Rat(config.kmax);
  }
  return Rat(0);
}

std::vector<int> adjacency(const std::vector<SubsetOfCircle>& prior,
                           const SubsetOfCircle& subset) {
  // Walk backward keeping the part of `subset` untouched by anything later.
  std::vector<int> out;
  SubsetOfCircle uncovered = subset;
  for (int i = static_cast<int>(prior.size()); i-- > 0;) {
    if (uncovered.empty()) break;
    const SubsetOfCircle& p = prior[static_cast<std::size_t>(i)];
    if (uncovered.intersects(p)) {
      out.push_back(i);
      // uncovered -= p
      SubsetOfCircle overlap = uncovered.intersect(p);
      std::vector<Interval> rest;
      for (const Interval& iv : uncovered.parts()) {
        Value cursor = iv.start;
        for (const Interval& ov : overlap.parts()) {
          if (ov.end <= iv.start || ov.start >= iv.end) continue;
          if (cursor < ov.start) rest.push_back({cursor, ov.start});
          cursor = std::max(cursor, ov.end);
        }
        if (cursor < iv.end) rest.push_back({cursor, iv.end});
      }
      uncovered = SubsetOfCircle(std::move(rest));
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

// Per-advertiser semi-assignment history shared by the variants.
struct AdvHistory {
  std::vector<int> rounds;
  std::vector<SubsetOfCircle> subsets;
  std::vector<bool> large;

  int size() const { return static_cast<int>(rounds.size()); }
  void push(int round, const SubsetOfCircle& s, bool is_large) {
    rounds.push_back(round);
    subsets.push_back(s);
    large.push_back(is_large);
  }
  std::vector<int> adjacent_positions(const SubsetOfCircle& s) const {
    return adjacency(subsets, s);
  }
};

struct RoundRecord {
  int adv1 = -1, adv2 = -1;
  int selected = 0;  // 1 or 2
  int selected_adv() const { return selected == 1 ? adv1 : adv2; }
};

class HistoryBase : public Selector {
 protected:
  AdvHistory& history(int adv) {
    if (adv >= static_cast<int>(histories_.size()))
      histories_.resize(static_cast<std::size_t>(adv) + 1);
    return histories_[static_cast<std::size_t>(adv)];
  }
  int finish_round(const RoundPair& pair, int selection) {
    RoundRecord rec;
    rec.adv1 = pair.first.advertiser;
    rec.adv2 = pair.second.advertiser;
    rec.selected = selection;
    records_.push_back(rec);
    history(pair.first.advertiser)
        .push(round_id_, pair.first.subset, pair.first.large());
    history(pair.second.advertiser)
        .push(round_id_, pair.second.subset, pair.second.large());
    selections_.push_back(selection);
    ++round_id_;
    return selection;
  }
  // Opposite selection w.r.t. `adv`: pick adv iff the earlier round did not.
  int opposite_selection(const RoundPair& pair, int earlier_round, int adv) const {
    const RoundRecord& rec = records_[static_cast<std::size_t>(earlier_round)];
    bool earlier_took_adv = rec.selected_adv() == adv;
    bool take_adv = !earlier_took_adv;
    if (pair.first.advertiser == adv) return take_adv ? 1 : 2;
    return take_adv ? 2 : 1;
  }

  int round_id_ = 0;
  std::vector<AdvHistory> histories_;
  std::vector<RoundRecord> records_;
};

class IndependentSelector final : public HistoryBase {
 public:
  int select(const RoundPair& pair, RandomSource& rng) override {
    return finish_round(pair, rng.coin() ? 2 : 1);
  }
  std::unique_ptr<Selector> clone() const override {
    return std::make_unique<IndependentSelector>(*this);
  }
};

// Algorithm of the 1/64 warmup: every round samples one of 8 slots
// (advertiser x offset in {-2,-1,+1,+2}); out-slots pass a fresh coin's
// result to the designated future round, in-slots receive when the ordinals
// match and the rounds are adjacent in the ex-ante graph.
class WarmupSelector final : public HistoryBase {
 public:
  int select(const RoundPair& pair, RandomSource& rng) override {
    const std::array<const RoundCandidate*, 2> cands{&pair.first, &pair.second};
    std::array<std::vector<int>, 2> adj;
    for (int c = 0; c < 2; ++c)
      adj[static_cast<std::size_t>(c)] =
          history(cands[static_cast<std::size_t>(c)]->advertiser)
              .adjacent_positions(cands[static_cast<std::size_t>(c)]->subset);

    std::size_t slot = rng.uniform(8);
    int cand_idx = static_cast<int>(slot / 4);
    static constexpr int kOffsets[4] = {1, 2, -1, -2};
    int offset = kOffsets[slot % 4];
    const RoundCandidate& cand = *cands[static_cast<std::size_t>(cand_idx)];
    AdvHistory& h = history(cand.advertiser);

    int selection = 0;
    if (offset < 0) {
      int pos = h.size() + offset;  // the |offset|-th previous semi round
      const auto& a = adj[static_cast<std::size_t>(cand_idx)];
      bool arc_exists = pos >= 0 && std::find(a.begin(), a.end(), pos) != a.end();
      if (arc_exists) {
        int from_round = h.rounds[static_cast<std::size_t>(pos)];
        auto sent = out_slots_.find(from_round);
        if (sent != out_slots_.end() && sent->second.first == cand.advertiser &&
            sent->second.second == -offset) {
          selection = opposite_selection(pair, from_round, cand.advertiser);
          arcs_.push_back({from_round, round_id_, cand.advertiser});
        }
      }
      if (selection == 0) selection = rng.coin() ? 2 : 1;
    } else {
      selection = rng.coin() ? 2 : 1;
      out_slots_[round_id_] = {cand.advertiser, offset};
    }
    return finish_round(pair, selection);
  }
  std::unique_ptr<Selector> clone() const override {
    return std::make_unique<WarmupSelector>(*this);
  }

 private:
  std::map<int, std::pair<int, int>> out_slots_;  // round -> (adv, ordinal)
};

// Improved large-bid algorithm: sender/receiver roles with probability p,
// arcs only between rounds whose bids for the shared advertiser are both
// large. Senders pick one of 4 future out-arc ordinals; receivers realize a
// uniformly chosen picked in-arc and flip the sender's selection.
class LargeBidSelector final : public HistoryBase {
 public:
  explicit LargeBidSelector(Rat p) : p_(std::move(p)) {}

  int select(const RoundPair& pair, RandomSource& rng) override {
    const std::array<const RoundCandidate*, 2> cands{&pair.first, &pair.second};
    struct InArc {
      int from_round;
      int advertiser;
      bool picked;
    };
    std::vector<InArc> in_arcs;
    for (int c = 0; c < 2; ++c) {
      const RoundCandidate& cand = *cands[static_cast<std::size_t>(c)];
      if (!cand.large()) continue;
      AdvHistory& h = history(cand.advertiser);
      for (int pos : h.adjacent_positions(cand.subset)) {
        if (!h.large[static_cast<std::size_t>(pos)]) continue;
        int from = h.rounds[static_cast<std::size_t>(pos)];
        int ordinal = ++out_arc_count_[{from, cand.advertiser}];
        ++out_degree_[from];
        ++in_degree_[round_id_];
        auto sent = senders_.find(from);
        bool picked = sent != senders_.end() &&
                      sent->second.first == cand.advertiser &&
                      sent->second.second == ordinal;
        in_arcs.push_back({from, cand.advertiser, picked});
      }
    }
    std::sort(in_arcs.begin(), in_arcs.end(),
              [](const InArc& a, const InArc& b) {
                return std::tie(a.from_round, a.advertiser) <
                       std::tie(b.from_round, b.advertiser);
              });

    int selection = 0;
    if (rng.bernoulli(p_)) {
      selection = rng.coin() ? 2 : 1;
      std::size_t slot = rng.uniform(4);
      const RoundCandidate& cand = *cands[slot / 2];
      senders_[round_id_] = {cand.advertiser, static_cast<int>(slot % 2) + 1};
    } else {
      std::vector<const InArc*> picked;
      for (const InArc& a : in_arcs)
        if (a.picked) picked.push_back(&a);
      if (!picked.empty()) {
        const InArc& arc = *picked[rng.uniform(picked.size())];
        selection = opposite_selection(pair, arc.from_round, arc.advertiser);
        arcs_.push_back({arc.from_round, round_id_, arc.advertiser});
      } else {
        selection = rng.coin() ? 2 : 1;
      }
    }
    return finish_round(pair, selection);
  }

  int max_ex_ante_degree() const override {
    int worst = 0;
    for (const auto& [r, d] : out_degree_) worst = std::max(worst, d);
    for (const auto& [r, d] : in_degree_) worst = std::max(worst, d);
    return worst;
  }

  std::unique_ptr<Selector> clone() const override {
    return std::make_unique<LargeBidSelector>(*this);
  }

 private:
  Rat p_;
  std::map<std::pair<int, int>, int> out_arc_count_;  // (round, adv) -> arcs
  std::map<int, std::pair<int, int>> senders_;        // round -> (adv, ordinal)
  std::map<int, int> out_degree_, in_degree_;
};

// General-bid algorithm: greedy first-level partition per advertiser,
// second-level groups keyed by the partner's first-level index, group-level
// sender/receiver decisions with slots over {j+1, j+2} x {1..2 kmax}, and a
// fresh coin choosing which group's decision an impression follows.
class GeneralBidSelector final : public HistoryBase {
 public:
  GeneralBidSelector(Rat p, int kmax) : p_(std::move(p)), kmax_(kmax) {}

  int select(const RoundPair& pair, RandomSource& rng) override {
    const std::array<const RoundCandidate*, 2> cands{&pair.first, &pair.second};
    std::array<int, 2> level{0, 0};
    for (int c = 0; c < 2; ++c) {
      const RoundCandidate& cand = *cands[static_cast<std::size_t>(c)];
      PartitionState& part = partition(cand.advertiser);
      AdvHistory& h = history(cand.advertiser);
      if (part.cur_j == 0) {
        part.cur_j = 1;
        part.first_pos = h.size();
      } else {
        std::vector<int> adj = h.adjacent_positions(cand.subset);
        if (std::find(adj.begin(), adj.end(), part.first_pos) != adj.end()) {
          part.cur_j += 1;
          part.first_pos = h.size();
        }
      }
      level[static_cast<std::size_t>(c)] = part.cur_j;
    }
    std::array<const GroupState*, 2> groups{};
    for (int c = 0; c < 2; ++c) {
      int adv = cands[static_cast<std::size_t>(c)]->advertiser;
      int j = level[static_cast<std::size_t>(c)];
      int partner_j = level[static_cast<std::size_t>(1 - c)];
      GroupState& g = decide_group(adv, j, partner_j, rng);
      g.members.push_back(round_id_);
      groups[static_cast<std::size_t>(c)] = &g;
    }
    int follow = rng.coin() ? 1 : 0;
    const GroupState& g = *groups[static_cast<std::size_t>(follow)];
    int selection;
    if (follow == 0)
      selection = g.selects_own ? 1 : 2;
    else
      selection = g.selects_own ? 2 : 1;
    return finish_round(pair, selection);
  }

  std::map<int, int> first_level_subset_counts() const override {
    std::map<int, int> out;
    for (std::size_t a = 0; a < partitions_.size(); ++a)
      if (partitions_[a].cur_j > 0)
        out[static_cast<int>(a)] = partitions_[a].cur_j;
    return out;
  }

  std::vector<GroupInfo> groups() const override {
    std::vector<GroupInfo> out;
    for (std::size_t a = 0; a < partitions_.size(); ++a)
      for (const auto& [key, g] : partitions_[a].groups)
        out.push_back({static_cast<int>(a), key.first, key.second, g.members});
    return out;
  }

  std::unique_ptr<Selector> clone() const override {
    return std::make_unique<GeneralBidSelector>(*this);
  }

 private:
  struct GroupState {
    int gid = -1;
    bool is_sender = false;
    bool selects_own = false;
    int slot_dj = 0;
    int slot_k = 0;
    std::vector<int> members;
  };
  struct PartitionState {
    int cur_j = 0;
    int first_pos = -1;
    std::map<std::pair<int, int>, GroupState> groups;  // (j, k) -> state
  };

  PartitionState& partition(int adv) {
    if (adv >= static_cast<int>(partitions_.size()))
      partitions_.resize(static_cast<std::size_t>(adv) + 1);
    return partitions_[static_cast<std::size_t>(adv)];
  }

  GroupState& decide_group(int adv, int j, int k, RandomSource& rng) {
    PartitionState& part = partition(adv);
    auto it = part.groups.find({j, k});
    if (it != part.groups.end()) return it->second;
    GroupState g;
    g.gid = next_gid_++;
    if (rng.bernoulli(p_)) {
      g.is_sender = true;
      g.selects_own = rng.coin();
      std::size_t slot = rng.uniform(static_cast<std::size_t>(4 * kmax_));
      g.slot_dj = 1 + static_cast<int>(slot) / (2 * kmax_);
      g.slot_k = 1 + static_cast<int>(slot) % (2 * kmax_);
    } else {
      // Senders in subsets j-1 and j-2 whose slot resolves to (j, k).
      std::vector<const GroupState*> picked;
      for (int dj = 1; dj <= 2; ++dj) {
        int js = j - dj;
        if (js < 1) continue;
        for (auto lo = part.groups.lower_bound({js, 0}),
                  hi = part.groups.lower_bound({js + 1, 0});
             lo != hi; ++lo) {
          const GroupState& s = lo->second;
          if (s.is_sender && s.slot_dj == dj && s.slot_k == k)
            picked.push_back(&s);
        }
      }
      if (!picked.empty()) {
        const GroupState& sender = *picked[rng.uniform(picked.size())];
        g.selects_own = !sender.selects_own;
        group_arcs_.push_back({sender.gid, g.gid});
      } else {
        g.selects_own = rng.coin();
      }
    }
    return part.groups.emplace(std::make_pair(j, k), g).first->second;
  }

  Rat p_;
  int kmax_;
  int next_gid_ = 0;
  std::vector<PartitionState> partitions_;
};

}  // namespace

std::unique_ptr<Selector> make_selector(const PanocsConfig& config) {
  switch (config.variant) {
    case PanocsVariant::kIndependent:
      return std::make_unique<IndependentSelector>();
    case PanocsVariant::kWarmup: return std::make_unique<WarmupSelector>();
    case PanocsVariant::kLargeBid:
      return std::make_unique<LargeBidSelector>(
          config.sender_p.is_zero() ? default_large_sender_p() : config.sender_p);
    case PanocsVariant::kGeneralBid:
      return std::make_unique<GeneralBidSelector>(
          config.sender_p.is_zero() ? default_general_sender_p()
                                    : config.sender_p,
          config.kmax);
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration
// ---------------------------------------------------------------------------

namespace {

// Replays a fixed prefix of outcomes; the first unscripted draw records the
// branch point, and every draw from then on returns outcome 0 (the run is
// discarded by the enumerator).
class ReplaySource final : public RandomSource {
 public:
  explicit ReplaySource(const std::vector<std::size_t>& path) : path_(path) {}

  std::size_t draw(const std::vector<Rat>& weights) override {
    if (branched_) return 0;
    if (pos_ < path_.size()) {
      std::size_t o = path_[pos_++];
      weight_ *= weights[o];
      return o;
    }
    branched_ = true;
    branch_weights_ = weights;
    return 0;
  }

  bool branched() const { return branched_; }
  const std::vector<Rat>& branch_weights() const { return branch_weights_; }
  const Rat& weight() const { return weight_; }

 private:
  const std::vector<std::size_t>& path_;
  std::size_t pos_ = 0;
  bool branched_ = false;
  std::vector<Rat> branch_weights_;
  Rat weight_{1};
};

class Enumerator {
 public:
  Enumerator(const Script& script,
             const std::function<void(const Selector&, const Rat&)>& leaf,
             std::uint64_t leaf_budget)
      : script_(script), leaf_(leaf), budget_(leaf_budget) {}

  EnumStats run(const PanocsConfig& config) {
    std::unique_ptr<Selector> root = make_selector(config);
    round(dynamic_cast<const HistoryBase&>(*root), Rat(1), 0);
    return stats_;
  }

 private:
  void round(const HistoryBase& state, const Rat& weight, std::size_t t) {
    if (t == script_.rounds.size()) {
      if (++stats_.leaves > budget_)
        throw std::runtime_error("panocs enumeration budget exceeded");
      stats_.total_weight += weight;
      leaf_(state, weight);
      return;
    }
    std::vector<std::size_t> path;
    explore(state, weight, t, path);
  }

  void explore(const HistoryBase& state, const Rat& weight, std::size_t t,
               std::vector<std::size_t>& path) {
    std::unique_ptr<Selector> fork = state.clone();
    ReplaySource src(path);
    fork->select(script_.rounds[t], src);
    if (!src.branched()) {
      round(dynamic_cast<const HistoryBase&>(*fork), weight * src.weight(),
            t + 1);
      return;
    }
    const std::vector<Rat> weights = src.branch_weights();
    for (std::size_t o = 0; o < weights.size(); ++o) {
      if (weights[o].is_zero()) continue;
      path.push_back(o);
      explore(state, weight, t, path);
      path.pop_back();
    }
  }

  const Script& script_;
  const std::function<void(const Selector&, const Rat&)>& leaf_;
  std::uint64_t budget_;
  EnumStats stats_;
};

}  // namespace

EnumStats enumerate_selector(
    const PanocsConfig& config, const Script& script,
    const std::function<void(const Selector&, const Rat&)>& leaf,
    std::uint64_t leaf_budget) {
  Enumerator e(script, leaf, leaf_budget);
  return e.run(config);
}

Rat selection_probability_exact(const PanocsConfig& config,
                                const Script& script, int advertiser,
                                Value point, std::uint64_t leaf_budget) {
  Rat assigned(0);
  EnumStats stats = enumerate_selector(
      config, script,
      [&](const Selector& s, const Rat& w) {
        const auto& sel = s.selections();
        for (std::size_t t = 0; t < script.rounds.size(); ++t) {
          const RoundPair& pair = script.rounds[t];
          const RoundCandidate& chosen =
              sel[t] == 1 ? pair.first : pair.second;
          if (chosen.advertiser == advertiser && chosen.subset.contains(point)) {
            assigned += w;
            return;
          }
        }
      },
      leaf_budget);
  if (stats.total_weight != Rat(1))
    throw std::logic_error("enumeration weights do not sum to 1");
  return assigned;
}

std::vector<Rat> selection_marginals_exact(const PanocsConfig& config,
                                           const Script& script,
                                           std::uint64_t leaf_budget) {
  std::vector<Rat> first(script.rounds.size(), Rat(0));
  EnumStats stats = enumerate_selector(
      config, script,
      [&](const Selector& s, const Rat& w) {
        for (std::size_t t = 0; t < script.rounds.size(); ++t)
          if (s.selections()[t] == 1) first[t] += w;
      },
      leaf_budget);
  if (stats.total_weight != Rat(1))
    throw std::logic_error("enumeration weights do not sum to 1");
  return first;
}

Rat chain_no_arc_probability(const PanocsConfig& config, int chain_len, int m,
                             std::uint64_t leaf_budget) {
  Script script = chain_script(chain_len);
  Rat no_arc(0);
  enumerate_selector(
      config, script,
      [&](const Selector& s, const Rat& w) {
        for (const RealizedArc& arc : s.realized_arcs()) {
          if (arc.advertiser == 0 && arc.to_round == arc.from_round + 1 &&
              arc.to_round <= m - 1)
            return;
        }
        no_arc += w;
      },
      leaf_budget);
  return no_arc;
}

Script chain_script(int k) {
  Script script;
  const Value budget = 2;
  script.budgets.assign(static_cast<std::size_t>(k) + 1, budget);
  for (int t = 0; t < k; ++t) {
    RoundPair pair;
    pair.first = {0, SubsetOfCircle::single(0, budget), budget, budget};
    pair.second = {t + 1, SubsetOfCircle::single(0, budget), budget, budget};
    script.rounds.push_back(std::move(pair));
  }
  return script;
}

Script script_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Script script;
  for (const auto& b : j.at("budgets"))
    script.budgets.push_back(b.get<Value>());
  auto parse_cand = [&](const nlohmann::json& c) {
    RoundCandidate cand;
    cand.advertiser = c.at("advertiser").get<int>();
    if (cand.advertiser < 0 ||
        cand.advertiser >= static_cast<int>(script.budgets.size()))
      throw std::runtime_error("script candidate advertiser out of range");
    cand.bid = c.at("bid").get<Value>();
    cand.budget = script.budgets[static_cast<std::size_t>(cand.advertiser)];
    std::vector<Interval> parts;
    for (const auto& iv : c.at("subset"))
      parts.push_back({iv.at(0).get<Value>(), iv.at(1).get<Value>()});
    cand.subset = SubsetOfCircle(std::move(parts));
    if (cand.subset.measure() > cand.bid)
      throw std::runtime_error("script subset larger than bid");
    return cand;
  };
  for (const auto& r : j.at("rounds")) {
    RoundPair pair;
    pair.first = parse_cand(r.at("first"));
    pair.second = parse_cand(r.at("second"));
    if (pair.first.advertiser == pair.second.advertiser)
      throw std::runtime_error("script round candidates must be distinct");
    script.rounds.push_back(std::move(pair));
  }
  return script;
}

std::string script_to_json(const Script& script) {
  nlohmann::ordered_json j;
  j["budgets"] = script.budgets;
  j["rounds"] = nlohmann::ordered_json::array();
  auto cand_json = [](const RoundCandidate& c) {
    nlohmann::ordered_json out;
    out["advertiser"] = c.advertiser;
    out["bid"] = c.bid;
    out["subset"] = nlohmann::ordered_json::array();
    for (const Interval& iv : c.subset.parts())
      out["subset"].push_back({iv.start, iv.end});
    return out;
  };
  for (const RoundPair& pair : script.rounds)
    j["rounds"].push_back(
        {{"first", cand_json(pair.first)}, {"second", cand_json(pair.second)}});
  return j.dump(2) + "\n";
}

}  // namespace adwords
