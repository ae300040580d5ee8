#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace adwords {

/// Money on the integer value grid: `scale` units per 1.0 of money.
/// All interval arithmetic below is exact on this grid.
using Value = std::int64_t;

struct Interval {
  Value start = 0;
  Value end = 0;  // half-open [start, end)
  Value length() const { return end - start; }
  bool operator==(const Interval&) const = default;
};

/// Finite union of disjoint half-open intervals inside [0, budget),
/// kept sorted, disjoint, non-empty, and with touching intervals merged.
class SubsetOfCircle {
 public:
  SubsetOfCircle() = default;
  explicit SubsetOfCircle(std::vector<Interval> parts);

  static SubsetOfCircle single(Value start, Value end);

  const std::vector<Interval>& parts() const { return parts_; }
  bool empty() const { return parts_.empty(); }
  Value measure() const;
  bool contains(Value point) const;
  bool intersects(const SubsetOfCircle& other) const;
  SubsetOfCircle unite(const SubsetOfCircle& other) const;
  SubsetOfCircle intersect(const SubsetOfCircle& other) const;

  bool operator==(const SubsetOfCircle&) const = default;

 private:
  std::vector<Interval> parts_;
};

/// Measure of the union of several subsets (the panorama-view payment of one
/// advertiser).
Value union_measure(const std::vector<SubsetOfCircle>& subsets);

/// Scan forward from y, skipping `excluded`, until measure b is consumed;
/// returns the stopping point. Returns y when b exceeds the non-excluded
/// measure (boundary convention) or when b == 0.
Value oplus(Value y, const SubsetOfCircle& excluded, Value b, Value budget);

/// Mirror of oplus scanning backward: [result, y) minus excluded has
/// measure b. Same boundary convention.
Value ominus(Value y, const SubsetOfCircle& excluded, Value b, Value budget);

enum class CommitKind { kSemi, kDeterministic };

/// One maximal run of points sharing an assignment status.
struct Segment {
  Value start = 0;
  Value end = 0;
  bool deterministic = false;
  int k = 0;        // semi-assignment count (kept after determinization)
  int k_large = 0;  // large-bid semis before the first small-bid one
  bool saw_small = false;

  Value length() const { return end - start; }

  bool same_status(const Segment& o) const {
    return deterministic == o.deterministic && k == o.k &&
           k_large == o.k_large && saw_small == o.saw_small;
  }
};

/// Per-advertiser circular budget interval with the scan pointer of the
/// panoramic interval-level assignment.
class AdvertiserPanorama {
 public:
  explicit AdvertiserPanorama(Value budget);

  Value budget() const { return budget_; }
  Value y_star() const { return y_star_; }
  Value det_measure() const { return det_measure_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Pure preview of the next panoramic interval-level assignment for bid b.
  /// If b exceeds the non-deterministic measure, returns the whole
  /// non-deterministic region.
  SubsetOfCircle next_subset(Value b) const;

  /// Applies a previously previewed subset. Semi commits bump k (and k_large
  /// bookkeeping when large_bid); deterministic commits freeze the region.
  /// Advances y_star to the scan end. Throws std::logic_error if the subset
  /// touches a deterministic segment (caller bug).
  void commit(const SubsetOfCircle& subset, CommitKind kind,
              bool large_bid = true);

  int k_at(Value point) const;
  bool deterministic_at(Value point) const;
  const Segment& segment_at(Value point) const;
  int k_min() const;  // over non-deterministic segments; 0 if none

  /// Structural check: non-deterministic k in {kmin, kmin+1},
  /// kmin segments start at or after y*, kmin+1 segments end at or before y*.
  bool k_property_holds() const;

  /// Debug dump, one "start..end k=<n|DET>" line per segment plus "y*=<v>".
  std::string dump() const;

 private:
  void split_at(Value point);
  void normalize();
  Value canonical_scan_position(Value z) const;

  Value budget_;
  Value y_star_ = 0;
  Value det_measure_ = 0;
  std::vector<Segment> segments_;
};

}  // namespace adwords
