#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "adwords/panorama.hpp"

namespace adwords {

/// An AdWords instance on the integer value grid. Impression order is
/// arrival order; missing bid entries mean bid 0.
struct Instance {
  struct Advertiser {
    std::string id;
    Value budget = 0;
  };
  struct Impression {
    std::string id;
    std::vector<std::pair<int, Value>> bids;  // (advertiser index, bid), sorted
  };

  std::int64_t scale = 1;
  std::vector<Advertiser> advertisers;
  std::vector<Impression> impressions;

  int num_advertisers() const { return static_cast<int>(advertisers.size()); }
  int num_impressions() const { return static_cast<int>(impressions.size()); }
  Value bid(int advertiser, int impression) const;
  int advertiser_index(const std::string& id) const;

  void validate() const;  // throws std::runtime_error naming the offender
};

/// min(sum of bids over S, budget) for advertiser a.
Value budget_additive_payment(const Instance& instance, int advertiser,
                              const std::vector<int>& impression_set);

Instance load_instance(std::istream& in);
Instance load_instance_file(const std::string& path);
std::string serialize_instance(const Instance& instance);

enum class Family { kUpperTriangular, kUniformRandom, kAllLarge, kMixed };
Family family_from_string(const std::string& name);  // throws on unknown
std::string family_to_string(Family family);

struct GenParams {
  int advertisers = 2;
  int impressions = 4;
  std::uint64_t seed = 0;
  std::int64_t scale = 100;
};

/// Deterministic in (family, params): same inputs, same instance.
Instance generate_instance(Family family, const GenParams& params);

/// splitmix64: the project's portable seeded generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, n), n >= 1 (rejection-free modulo; fine at desk scale).
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t state_;
};

}  // namespace adwords
