#include "adwords/panorama.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace adwords {

SubsetOfCircle::SubsetOfCircle(std::vector<Interval> parts)
    : parts_(std::move(parts)) {
  std::sort(parts_.begin(), parts_.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> merged;
  for (const Interval& iv : parts_) {
    if (iv.start > iv.end) throw std::invalid_argument("inverted interval");
    if (iv.start == iv.end) continue;
    if (!merged.empty() && iv.start < merged.back().end)
      throw std::invalid_argument("overlapping intervals in subset");
    if (!merged.empty() && iv.start == merged.back().end)
      merged.back().end = iv.end;
    else
      merged.push_back(iv);
  }
  parts_ = std::move(merged);
}

SubsetOfCircle SubsetOfCircle::single(Value start, Value end) {
  return SubsetOfCircle({Interval{start, end}});
}

Value SubsetOfCircle::measure() const {
  Value total = 0;
  for (const Interval& iv : parts_) total += iv.length();
  return total;
}

bool SubsetOfCircle::contains(Value point) const {
  for (const Interval& iv : parts_)
    if (point >= iv.start && point < iv.end) return true;
  return false;
}

bool SubsetOfCircle::intersects(const SubsetOfCircle& other) const {
  auto a = parts_.begin();
  auto b = other.parts_.begin();
  while (a != parts_.end() && b != other.parts_.end()) {
    if (a->end <= b->start)
      ++a;
    else if (b->end <= a->start)
      ++b;
    else
      return true;
  }
  return false;
}

SubsetOfCircle SubsetOfCircle::unite(const SubsetOfCircle& other) const {
  std::vector<Interval> all = parts_;
  all.insert(all.end(), other.parts_.begin(), other.parts_.end());
  std::sort(all.begin(), all.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<Interval> merged;
  for (const Interval& iv : all) {
    if (!merged.empty() && iv.start <= merged.back().end)
      merged.back().end = std::max(merged.back().end, iv.end);
    else
      merged.push_back(iv);
  }
  SubsetOfCircle result;
  result.parts_ = std::move(merged);
  return result;
}

SubsetOfCircle SubsetOfCircle::intersect(const SubsetOfCircle& other) const {
  std::vector<Interval> out;
  auto a = parts_.begin();
  auto b = other.parts_.begin();
  while (a != parts_.end() && b != other.parts_.end()) {
    Value lo = std::max(a->start, b->start);
    Value hi = std::min(a->end, b->end);
    if (lo < hi) out.push_back({lo, hi});
    if (a->end < b->end)
      ++a;
    else
      ++b;
  }
  return SubsetOfCircle(std::move(out));
}

Value union_measure(const std::vector<SubsetOfCircle>& subsets) {
  SubsetOfCircle all;
  for (const SubsetOfCircle& s : subsets) all = all.unite(s);
  return all.measure();
}

namespace {

// Non-excluded gaps of [0, budget), sorted.
std::vector<Interval> complement(const SubsetOfCircle& excluded, Value budget) {
  std::vector<Interval> gaps;
  Value cursor = 0;
  for (const Interval& iv : excluded.parts()) {
    if (cursor < iv.start) gaps.push_back({cursor, iv.start});
    cursor = iv.end;
  }
  if (cursor < budget) gaps.push_back({cursor, budget});
  return gaps;
}

}  // namespace

Value oplus(Value y, const SubsetOfCircle& excluded, Value b, Value budget) {
  Value avail = budget - excluded.measure();
  if (b > avail || b == 0) return y;
  std::vector<Interval> gaps = complement(excluded, budget);
  // Circular walk starting at y: pieces at or after y first, then the wrap.
  std::vector<Interval> walk;
  for (const Interval& g : gaps) {
    if (g.end <= y) continue;
    walk.push_back({std::max(g.start, y), g.end});
  }
  for (const Interval& g : gaps) {
    if (g.start >= y) break;
    walk.push_back({g.start, std::min(g.end, y)});
  }
  for (const Interval& piece : walk) {
    if (piece.start >= piece.end) continue;
    Value len = piece.length();
    if (b <= len) {
      Value z = piece.start + b;
      return z == budget ? 0 : z;
    }
    b -= len;
  }
  return y;  // b == avail: a full lap
}

Value ominus(Value y, const SubsetOfCircle& excluded, Value b, Value budget) {
  Value avail = budget - excluded.measure();
  if (b > avail || b == 0) return y;
  std::vector<Interval> gaps = complement(excluded, budget);
  // Circular walk ending at y, taken backward: pieces before y in reverse,
  // then the wrap from the top.
  std::vector<Interval> walk;
  for (auto it = gaps.rbegin(); it != gaps.rend(); ++it) {
    if (it->start >= y) continue;
    walk.push_back({it->start, std::min(it->end, y)});
  }
  for (auto it = gaps.rbegin(); it != gaps.rend(); ++it) {
    if (it->end <= y) break;
    walk.push_back({std::max(it->start, y), it->end});
  }
  for (const Interval& piece : walk) {
    if (piece.start >= piece.end) continue;
    Value len = piece.length();
    if (b <= len) return piece.end - b;
    b -= len;
  }
  return y;
}

AdvertiserPanorama::AdvertiserPanorama(Value budget) : budget_(budget) {
  if (budget <= 0) throw std::invalid_argument("budget must be positive");
  segments_.push_back(Segment{0, budget});
}

SubsetOfCircle AdvertiserPanorama::next_subset(Value b) const {
  Value want = std::min(b, budget_ - det_measure_);
  if (want <= 0) return {};
  std::vector<Interval> taken;
  // Two passes over the segment list give the circular order from y*.
  auto consume = [&](Value lo, Value hi) {
    for (const Segment& seg : segments_) {
      if (want == 0) break;
      if (seg.deterministic) continue;
      Value s = std::max(seg.start, lo);
      Value e = std::min(seg.end, hi);
      if (s >= e) continue;
      Value take = std::min(want, e - s);
      taken.push_back({s, s + take});
      want -= take;
    }
  };
  consume(y_star_, budget_);
  consume(0, y_star_);
  return SubsetOfCircle(std::move(taken));
}

void AdvertiserPanorama::split_at(Value point) {
  if (point <= 0 || point >= budget_) return;
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    Segment& seg = segments_[i];
    if (seg.start < point && point < seg.end) {
      Segment right = seg;
      right.start = point;
      seg.end = point;
      segments_.insert(segments_.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                       right);
      return;
    }
  }
}

void AdvertiserPanorama::normalize() {
  std::vector<Segment> merged;
  for (const Segment& seg : segments_) {
    if (!merged.empty() && merged.back().same_status(seg) &&
        merged.back().end == seg.start)
      merged.back().end = seg.end;
    else
      merged.push_back(seg);
  }
  segments_ = std::move(merged);
}

void AdvertiserPanorama::commit(const SubsetOfCircle& subset, CommitKind kind,
                                bool large_bid) {
  if (subset.empty()) return;
  const Value b = subset.measure();

  // The scan end, relative to the deterministic region before this commit.
  std::vector<Interval> det_parts;
  for (const Segment& seg : segments_)
    if (seg.deterministic) det_parts.push_back({seg.start, seg.end});
  SubsetOfCircle det_region{std::move(det_parts)};
  if (subset.intersects(det_region))
    throw std::logic_error("commit subset overlaps deterministic region");
  Value scan_end = oplus(y_star_, det_region, b, budget_);

  for (const Interval& iv : subset.parts()) {
    split_at(iv.start);
    split_at(iv.end);
  }
  for (Segment& seg : segments_) {
    if (!subset.contains(seg.start)) continue;
    if (kind == CommitKind::kSemi) {
      seg.k += 1;
      if (large_bid) {
        if (!seg.saw_small) seg.k_large += 1;
      } else {
        seg.saw_small = true;
      }
    } else {
      seg.deterministic = true;
      det_measure_ += seg.length();
    }
  }
  normalize();
  // Positions inside Y_D are equivalent for the scan; keep y* canonical at
  // the first non-deterministic point so the K-property reads off directly.
  y_star_ = canonical_scan_position(scan_end);
}

Value AdvertiserPanorama::canonical_scan_position(Value z) const {
  if (det_measure_ == budget_) return z;
  for (const Segment& seg : segments_) {
    if (seg.deterministic || seg.end <= z) continue;
    return std::max(seg.start, z);
  }
  for (const Segment& seg : segments_)
    if (!seg.deterministic) return seg.start;
  return z;
}

const Segment& AdvertiserPanorama::segment_at(Value point) const {
  for (const Segment& seg : segments_)
    if (point >= seg.start && point < seg.end) return seg;
  throw std::out_of_range("point outside [0, budget)");
}

int AdvertiserPanorama::k_at(Value point) const { return segment_at(point).k; }

bool AdvertiserPanorama::deterministic_at(Value point) const {
  return segment_at(point).deterministic;
}

int AdvertiserPanorama::k_min() const {
  int kmin = -1;
  for (const Segment& seg : segments_)
    if (!seg.deterministic && (kmin < 0 || seg.k < kmin)) kmin = seg.k;
  return kmin < 0 ? 0 : kmin;
}

bool AdvertiserPanorama::k_property_holds() const {
  int kmin = -1;
  for (const Segment& seg : segments_)
    if (!seg.deterministic && (kmin < 0 || seg.k < kmin)) kmin = seg.k;
  if (kmin < 0) return true;  // everything deterministic
  for (const Segment& seg : segments_) {
    if (seg.deterministic) continue;
    if (seg.k != kmin && seg.k != kmin + 1) return false;
    if (seg.k == kmin && seg.start < y_star_) return false;
    if (seg.k == kmin + 1 && seg.end > y_star_) return false;
  }
  return true;
}

std::string AdvertiserPanorama::dump() const {
  std::ostringstream out;
  for (const Segment& seg : segments_) {
    out << seg.start << ".." << seg.end << " k=";
    if (seg.deterministic)
      out << "DET";
    else
      out << seg.k;
    out << "\n";
  }
  out << "y*=" << y_star_ << "\n";
  return out.str();
}

}  // namespace adwords
