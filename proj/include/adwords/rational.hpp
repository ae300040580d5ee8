#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "adwords/bigint.hpp"

namespace adwords {

/// Exact rational number, always stored reduced with a positive denominator.
/// The project keeps every dual-ledger quantity, parameter-table entry, and
/// enumeration probability in this type; doubles appear only at the edges
/// (LP pivoting, report output).
class Rat {
 public:
  Rat() : num_(0), den_(1) {}
  Rat(std::int64_t v) : num_(v), den_(1) {}  // NOLINT: implicit by design
  Rat(std::int64_t num, std::int64_t den) : num_(num), den_(den) { reduce(); }
  Rat(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    reduce();
  }

  static Rat from_double_exact(double v);
  /// Parses "n", "n/d", or a plain decimal like "0.05144" (exactly).
  static Rat parse(const std::string& text);

  const BigInt& num() const { return num_; }
  const BigInt& den() const { return den_; }

  Rat operator-() const;
  Rat operator+(const Rat& o) const;
  Rat operator-(const Rat& o) const;
  Rat operator*(const Rat& o) const;
  Rat operator/(const Rat& o) const;
  Rat& operator+=(const Rat& o) { return *this = *this + o; }
  Rat& operator-=(const Rat& o) { return *this = *this - o; }
  Rat& operator*=(const Rat& o) { return *this = *this * o; }
  Rat& operator/=(const Rat& o) { return *this = *this / o; }

  bool operator==(const Rat& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  bool operator!=(const Rat& o) const { return !(*this == o); }
  bool operator<(const Rat& o) const;
  bool operator>(const Rat& o) const { return o < *this; }
  bool operator<=(const Rat& o) const { return !(o < *this); }
  bool operator>=(const Rat& o) const { return !(*this < o); }

  bool is_zero() const { return num_.is_zero(); }
  int sign() const { return num_.sign(); }

  static Rat pow(const Rat& base, unsigned exp);
  /// Best rational approximation with denominator <= max_den
  /// (continued-fraction convergents / semiconvergents).
  static Rat rationalize(const Rat& x, const BigInt& max_den);

  double to_double() const;
  std::string to_string() const;  // "n/d" or "n"

 private:
  void reduce();
  BigInt num_;
  BigInt den_;
};

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }

}  // namespace adwords
