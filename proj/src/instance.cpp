#include "adwords/instance.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace adwords {

Value Instance::bid(int advertiser, int impression) const {
  const auto& bids = impressions[static_cast<std::size_t>(impression)].bids;
  auto it = std::lower_bound(
      bids.begin(), bids.end(), advertiser,
      [](const std::pair<int, Value>& e, int a) { return e.first < a; });
  if (it != bids.end() && it->first == advertiser) return it->second;
  return 0;
}

int Instance::advertiser_index(const std::string& id) const {
  for (int a = 0; a < num_advertisers(); ++a)
    if (advertisers[static_cast<std::size_t>(a)].id == id) return a;
  return -1;
}

void Instance::validate() const {
  constexpr Value kMaxValue = (Value{1} << 53) - 1;
  if (scale < 1) throw std::runtime_error("scale must be >= 1");
  std::set<std::string> seen;
  for (const auto& adv : advertisers) {
    if (!seen.insert(adv.id).second)
      throw std::runtime_error("duplicate advertiser id: " + adv.id);
    if (adv.budget <= 0)
      throw std::runtime_error("non-positive budget for advertiser: " + adv.id);
    if (adv.budget > kMaxValue)
      throw std::runtime_error("budget beyond 2^53-1 for advertiser: " + adv.id);
  }
  seen.clear();
  for (const auto& imp : impressions) {
    if (!seen.insert(imp.id).second)
      throw std::runtime_error("duplicate impression id: " + imp.id);
    for (const auto& [a, b] : imp.bids) {
      if (a < 0 || a >= num_advertisers())
        throw std::runtime_error("unknown advertiser in bids of impression: " +
                                 imp.id);
      if (b < 0)
        throw std::runtime_error("negative bid on impression: " + imp.id);
      if (b > advertisers[static_cast<std::size_t>(a)].budget)
        throw std::runtime_error(
            "bid exceeds budget: impression " + imp.id + ", advertiser " +
            advertisers[static_cast<std::size_t>(a)].id);
    }
  }
}

Value budget_additive_payment(const Instance& instance, int advertiser,
                              const std::vector<int>& impression_set) {
  const Value budget =
      instance.advertisers[static_cast<std::size_t>(advertiser)].budget;
  Value total = 0;
  for (int i : impression_set) {
    if (i < 0 || i >= instance.num_impressions())
      throw std::runtime_error("unknown impression index in payment query");
    total = std::min<Value>(budget, total + instance.bid(advertiser, i));
  }
  return total;
}

Instance load_instance(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("instance parse failure: ") + e.what());
  }
  Instance inst;
  inst.scale = j.at("scale").get<std::int64_t>();
  std::map<std::string, int> index;
  for (const auto& adv : j.at("advertisers")) {
    Instance::Advertiser a;
    a.id = adv.at("id").get<std::string>();
    a.budget = adv.at("budget").get<Value>();
    index[a.id] = inst.num_advertisers();
    inst.advertisers.push_back(std::move(a));
  }
  for (const auto& imp : j.at("impressions")) {
    Instance::Impression im;
    im.id = imp.at("id").get<std::string>();
    for (const auto& [id, bid] : imp.at("bids").items()) {
      auto it = index.find(id);
      if (it == index.end())
        throw std::runtime_error("bid on unknown advertiser " + id +
                                 " in impression " + im.id);
      Value b = bid.get<Value>();
      if (b != 0) im.bids.emplace_back(it->second, b);
    }
    std::sort(im.bids.begin(), im.bids.end());
    inst.impressions.push_back(std::move(im));
  }
  inst.validate();
  return inst;
}

Instance load_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  return load_instance(in);
}

std::string serialize_instance(const Instance& instance) {
  nlohmann::ordered_json j;
  j["scale"] = instance.scale;
  j["advertisers"] = nlohmann::ordered_json::array();
  for (const auto& adv : instance.advertisers)
    j["advertisers"].push_back({{"id", adv.id}, {"budget", adv.budget}});
  j["impressions"] = nlohmann::ordered_json::array();
  for (const auto& imp : instance.impressions) {
    nlohmann::ordered_json bids = nlohmann::ordered_json::object();
    for (const auto& [a, b] : imp.bids)
      bids[instance.advertisers[static_cast<std::size_t>(a)].id] = b;
    j["impressions"].push_back({{"id", imp.id}, {"bids", std::move(bids)}});
  }
  return j.dump(2) + "\n";
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t n) { return next() % n; }

Family family_from_string(const std::string& name) {
  if (name == "upper-triangular") return Family::kUpperTriangular;
  if (name == "uniform-random") return Family::kUniformRandom;
  if (name == "all-large") return Family::kAllLarge;
  if (name == "mixed") return Family::kMixed;
  throw std::runtime_error("unknown instance family: " + name);
}

std::string family_to_string(Family family) {
  switch (family) {
    case Family::kUpperTriangular: return "upper-triangular";
    case Family::kUniformRandom: return "uniform-random";
    case Family::kAllLarge: return "all-large";
    case Family::kMixed: return "mixed";
  }
  return "?";
}

Instance generate_instance(Family family, const GenParams& params) {
  if (params.advertisers < 1 || params.impressions < 1)
    throw std::runtime_error("generator counts must be >= 1");
  SplitMix64 rng(params.seed);
  Instance inst;
  inst.scale = params.scale;
  for (int a = 0; a < params.advertisers; ++a) {
    Instance::Advertiser adv;
    adv.id = "a" + std::to_string(a + 1);
    if (family == Family::kUpperTriangular) {
      adv.budget = params.scale;
    } else {
      adv.budget =
          params.scale * static_cast<Value>(1 + rng.below(8));
    }
    inst.advertisers.push_back(std::move(adv));
  }
  for (int i = 0; i < params.impressions; ++i) {
    Instance::Impression imp;
    imp.id = "i" + std::to_string(i + 1);
    for (int a = 0; a < params.advertisers; ++a) {
      const Value budget =
          inst.advertisers[static_cast<std::size_t>(a)].budget;
      Value b = 0;
      switch (family) {
        case Family::kUpperTriangular:
          // Impression j bids on advertisers j..n only.
          b = (a >= i) ? budget : 0;
          break;
        case Family::kUniformRandom:
          if (rng.below(3) != 0)
            b = static_cast<Value>(rng.below(static_cast<std::uint64_t>(budget) + 1));
          break;
        case Family::kAllLarge: {
          if (rng.below(3) != 0) {
            Value low = (budget + 1) / 2;  // ceil(B/2)
            b = low + static_cast<Value>(
                          rng.below(static_cast<std::uint64_t>(budget - low) + 1));
          }
          break;
        }
        case Family::kMixed: {
          std::uint64_t kind = rng.below(4);
          if (kind == 0) {
            b = 0;
          } else if (kind == 1) {
            Value low = (budget + 1) / 2;
            b = low + static_cast<Value>(
                          rng.below(static_cast<std::uint64_t>(budget - low) + 1));
          } else {
            b = static_cast<Value>(
                rng.below(static_cast<std::uint64_t>(budget / 2) + 1));
          }
          break;
        }
      }
      if (b != 0) imp.bids.emplace_back(a, b);
    }
    inst.impressions.push_back(std::move(imp));
  }
  inst.validate();
  return inst;
}

}  // namespace adwords
