#include "adwords/bigint.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace adwords {

namespace {
constexpr std::uint64_t kBase = 1ull << 32;
}

BigInt::BigInt(std::int64_t v) {
  negative_ = v < 0;
  std::uint64_t m = negative_ ? ~static_cast<std::uint64_t>(v) + 1
                              : static_cast<std::uint64_t>(v);
  while (m != 0) {
    limbs_.push_back(static_cast<std::uint32_t>(m & 0xffffffffu));
    m >>= 32;
  }
}

BigInt BigInt::from_string(const std::string& decimal) {
  BigInt r;
  std::size_t pos = 0;
  bool neg = false;
  if (pos < decimal.size() && (decimal[pos] == '-' || decimal[pos] == '+')) {
    neg = decimal[pos] == '-';
    ++pos;
  }
  if (pos == decimal.size()) throw std::invalid_argument("empty integer");
  for (; pos < decimal.size(); ++pos) {
    char c = decimal[pos];
    if (c < '0' || c > '9') throw std::invalid_argument("bad digit");
    r = r * BigInt(10) + BigInt(c - '0');
  }
  r.negative_ = neg && !r.is_zero();
  return r;
}

void BigInt::trim() {
  while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
  if (limbs_.empty()) negative_ = false;
}

int BigInt::cmp_mag(const BigInt& a, const BigInt& b) {
  if (a.limbs_.size() != b.limbs_.size())
    return a.limbs_.size() < b.limbs_.size() ? -1 : 1;
  for (std::size_t i = a.limbs_.size(); i-- > 0;) {
    if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
  }
  return 0;
}

BigInt BigInt::add_mag(const BigInt& a, const BigInt& b) {
  BigInt r;
  r.limbs_.resize(std::max(a.limbs_.size(), b.limbs_.size()) + 1, 0);
  std::uint64_t carry = 0;
  for (std::size_t i = 0; i < r.limbs_.size(); ++i) {
    std::uint64_t s = carry;
    if (i < a.limbs_.size()) s += a.limbs_[i];
    if (i < b.limbs_.size()) s += b.limbs_[i];
    r.limbs_[i] = static_cast<std::uint32_t>(s & 0xffffffffu);
    carry = s >> 32;
  }
  r.trim();
  return r;
}

BigInt BigInt::sub_mag(const BigInt& a, const BigInt& b) {
  BigInt r;
  r.limbs_.resize(a.limbs_.size(), 0);
  std::int64_t borrow = 0;
  for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
    std::int64_t d = static_cast<std::int64_t>(a.limbs_[i]) - borrow -
                     (i < b.limbs_.size() ? b.limbs_[i] : 0);
    if (d < 0) {
      d += static_cast<std::int64_t>(kBase);
      borrow = 1;
    } else {
      borrow = 0;
    }
    r.limbs_[i] = static_cast<std::uint32_t>(d);
  }
  r.trim();
  return r;
}

BigInt BigInt::operator-() const {
  BigInt r = *this;
  if (!r.is_zero()) r.negative_ = !r.negative_;
  return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
  if (negative_ == o.negative_) {
    BigInt r = add_mag(*this, o);
    r.negative_ = negative_ && !r.is_zero();
    return r;
  }
  int c = cmp_mag(*this, o);
  if (c == 0) return BigInt();
  BigInt r = c > 0 ? sub_mag(*this, o) : sub_mag(o, *this);
  r.negative_ = (c > 0 ? negative_ : o.negative_) && !r.is_zero();
  return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
  if (is_zero() || o.is_zero()) return BigInt();
  BigInt r;
  r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
  for (std::size_t i = 0; i < limbs_.size(); ++i) {
    std::uint64_t carry = 0;
    for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
      std::uint64_t cur = static_cast<std::uint64_t>(limbs_[i]) * o.limbs_[j] +
                          r.limbs_[i + j] + carry;
      r.limbs_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
    }
    std::size_t k = i + o.limbs_.size();
    while (carry != 0) {
      std::uint64_t cur = r.limbs_[k] + carry;
      r.limbs_[k] = static_cast<std::uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
      ++k;
    }
  }
  r.negative_ = negative_ != o.negative_;
  r.trim();
  return r;
}

namespace {

// Knuth TAOCP vol.2 Algorithm D on 32-bit limbs, magnitudes only.
void divmod_mag(const std::vector<std::uint32_t>& num,
                const std::vector<std::uint32_t>& den,
                std::vector<std::uint32_t>& quot,
                std::vector<std::uint32_t>& rem) {
  const std::size_t n = den.size();
  const std::size_t m = num.size();
  if (n == 1) {
    quot.assign(m, 0);
    std::uint64_t r = 0;
    for (std::size_t i = m; i-- > 0;) {
      std::uint64_t cur = (r << 32) | num[i];
      quot[i] = static_cast<std::uint32_t>(cur / den[0]);
      r = cur % den[0];
    }
    rem.clear();
    if (r != 0) rem.push_back(static_cast<std::uint32_t>(r));
    return;
  }
  // Normalize so the divisor's top limb has its high bit set.
  int shift = 0;
  for (std::uint32_t top = den[n - 1]; !(top & 0x80000000u); top <<= 1)
    ++shift;
  std::vector<std::uint32_t> u(m + 1, 0), v(n, 0);
  for (std::size_t i = m; i-- > 0;) {
    u[i] |= static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(num[i]) << shift) & 0xffffffffu);
    if (shift && i + 1 <= m)
      u[i + 1] |= static_cast<std::uint32_t>(
          static_cast<std::uint64_t>(num[i]) >> (32 - shift));
  }
  for (std::size_t i = n; i-- > 0;) {
    v[i] |= static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(den[i]) << shift) & 0xffffffffu);
    if (shift && i + 1 < n)
      v[i + 1] |= static_cast<std::uint32_t>(
          static_cast<std::uint64_t>(den[i]) >> (32 - shift));
  }
  quot.assign(m >= n ? m - n + 1 : 0, 0);
  for (std::size_t j = m >= n ? m - n + 1 : 0; j-- > 0;) {
    std::uint64_t numer =
        (static_cast<std::uint64_t>(u[j + n]) << 32) | u[j + n - 1];
    std::uint64_t qhat = numer / v[n - 1];
    std::uint64_t rhat = numer % v[n - 1];
    while (qhat >= kBase ||
           qhat * v[n - 2] > ((rhat << 32) | u[j + n - 2])) {
      --qhat;
      rhat += v[n - 1];
      if (rhat >= kBase) break;
    }
    // u[j..j+n] -= qhat * v
    std::int64_t borrow = 0;
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t p = qhat * v[i] + carry;
      carry = p >> 32;
      std::int64_t t = static_cast<std::int64_t>(u[i + j]) -
                       static_cast<std::int64_t>(p & 0xffffffffu) - borrow;
      if (t < 0) {
        t += static_cast<std::int64_t>(kBase);
        borrow = 1;
      } else {
        borrow = 0;
      }
      u[i + j] = static_cast<std::uint32_t>(t);
    }
    std::int64_t t = static_cast<std::int64_t>(u[j + n]) -
                     static_cast<std::int64_t>(carry) - borrow;
    if (t < 0) {
      // qhat was one too large; add v back.
      --qhat;
      std::uint64_t c = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t s = static_cast<std::uint64_t>(u[i + j]) + v[i] + c;
        u[i + j] = static_cast<std::uint32_t>(s & 0xffffffffu);
        c = s >> 32;
      }
      t += static_cast<std::int64_t>(c);
    }
    u[j + n] = static_cast<std::uint32_t>(t);
    quot[j] = static_cast<std::uint32_t>(qhat);
  }
  // Denormalize the remainder held in u[0..n] (u[n] is zero by now).
  rem.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    rem[i] = u[i] >> shift;
    if (shift)
      rem[i] |= static_cast<std::uint32_t>(
          (static_cast<std::uint64_t>(u[i + 1]) << (32 - shift)) & 0xffffffffu);
  }
}

}  // namespace

void BigInt::divmod(const BigInt& num, const BigInt& den, BigInt& quot,
                    BigInt& rem) {
  if (den.is_zero()) throw std::domain_error("division by zero");
  if (cmp_mag(num, den) < 0) {
    quot = BigInt();
    rem = num;
    return;
  }
  BigInt q, r;
  divmod_mag(num.limbs_, den.limbs_, q.limbs_, r.limbs_);
  q.trim();
  r.trim();
  q.negative_ = (num.negative_ != den.negative_) && !q.is_zero();
  r.negative_ = num.negative_ && !r.is_zero();
  quot = q;
  rem = r;
}

BigInt BigInt::operator/(const BigInt& o) const {
  BigInt q, r;
  divmod(*this, o, q, r);
  return q;
}

BigInt BigInt::operator%(const BigInt& o) const {
  BigInt q, r;
  divmod(*this, o, q, r);
  return r;
}

bool BigInt::operator==(const BigInt& o) const {
  return negative_ == o.negative_ && limbs_ == o.limbs_;
}

bool BigInt::operator<(const BigInt& o) const {
  if (negative_ != o.negative_) return negative_;
  int c = cmp_mag(*this, o);
  return negative_ ? c > 0 : c < 0;
}

BigInt BigInt::abs() const {
  BigInt r = *this;
  r.negative_ = false;
  return r;
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
  a.negative_ = false;
  b.negative_ = false;
  while (!b.is_zero()) {
    BigInt q, r;
    divmod(a, b, q, r);
    a = b;
    b = r;
  }
  return a;
}

BigInt BigInt::pow(const BigInt& base, unsigned exp) {
  BigInt r(1), b = base;
  while (exp != 0) {
    if (exp & 1u) r *= b;
    b = b * b;
    exp >>= 1;
  }
  return r;
}

bool BigInt::fits_int64() const {
  if (limbs_.size() < 2) return true;
  if (limbs_.size() > 2) return false;
  std::uint64_t m =
      (static_cast<std::uint64_t>(limbs_[1]) << 32) | limbs_[0];
  return negative_ ? m <= (1ull << 63) : m < (1ull << 63);
}

std::int64_t BigInt::to_int64() const {
  if (!fits_int64()) throw std::overflow_error("BigInt exceeds int64");
  std::uint64_t m = 0;
  if (limbs_.size() > 0) m = limbs_[0];
  if (limbs_.size() > 1) m |= static_cast<std::uint64_t>(limbs_[1]) << 32;
  return negative_ ? -static_cast<std::int64_t>(m) : static_cast<std::int64_t>(m);
}

double BigInt::to_double() const {
  double r = 0.0;
  for (std::size_t i = limbs_.size(); i-- > 0;)
    r = r * 4294967296.0 + limbs_[i];
  return negative_ ? -r : r;
}

std::string BigInt::to_string() const {
  if (is_zero()) return "0";
  BigInt n = abs();
  const BigInt chunk(1000000000);
  std::string out;
  while (!n.is_zero()) {
    BigInt q, r;
    divmod(n, chunk, q, r);
    std::int64_t part = r.to_int64();
    for (int i = 0; i < 9; ++i) {
      out.push_back(static_cast<char>('0' + part % 10));
      part /= 10;
    }
    n = q;
  }
  while (out.size() > 1 && out.back() == '0') out.pop_back();
  if (negative_) out.push_back('-');
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace adwords
