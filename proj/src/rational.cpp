#include "adwords/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace adwords {

void Rat::reduce() {
  if (den_.is_zero()) throw std::domain_error("rational with zero denominator");
  if (den_.is_negative()) {
    num_ = -num_;
    den_ = -den_;
  }
  if (num_.is_zero()) {
    den_ = BigInt(1);
    return;
  }
  BigInt g = BigInt::gcd(num_, den_);
  if (g != BigInt(1)) {
    num_ = num_ / g;
    den_ = den_ / g;
  }
}

Rat Rat::from_double_exact(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite double");
  if (v == 0.0) return Rat();
  int exp = 0;
  double mant = std::frexp(v, &exp);  // v = mant * 2^exp, |mant| in [0.5, 1)
  // 53 doublings make the mantissa an integer.
  std::int64_t m = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  BigInt num(m), den(1);
  if (exp >= 0)
    num *= BigInt::pow(BigInt(2), static_cast<unsigned>(exp));
  else
    den = BigInt::pow(BigInt(2), static_cast<unsigned>(-exp));
  return Rat(std::move(num), std::move(den));
}

Rat Rat::parse(const std::string& text) {
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    return Rat(BigInt::from_string(text.substr(0, slash)),
               BigInt::from_string(text.substr(slash + 1)));
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) return Rat(BigInt::from_string(text), BigInt(1));
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  unsigned places = static_cast<unsigned>(text.size() - dot - 1);
  return Rat(BigInt::from_string(digits),
             BigInt::pow(BigInt(10), places));
}

Rat Rat::operator-() const {
  Rat r = *this;
  r.num_ = -r.num_;
  return r;
}

Rat Rat::operator+(const Rat& o) const {
  return Rat(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rat Rat::operator-(const Rat& o) const {
  return Rat(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Rat Rat::operator*(const Rat& o) const {
  return Rat(num_ * o.num_, den_ * o.den_);
}

Rat Rat::operator/(const Rat& o) const {
  if (o.is_zero()) throw std::domain_error("division by zero rational");
  return Rat(num_ * o.den_, den_ * o.num_);
}

bool Rat::operator<(const Rat& o) const {
  return num_ * o.den_ < o.num_ * den_;
}

Rat Rat::pow(const Rat& base, unsigned exp) {
  return Rat(BigInt::pow(base.num(), exp), BigInt::pow(base.den(), exp));
}

Rat Rat::rationalize(const Rat& x, const BigInt& max_den) {
  if (x.den() <= max_den) return x;
  // Stern-Brocot style walk over continued-fraction convergents.
  BigInt p0(0), q0(1), p1(1), q1(0);
  BigInt n = x.num().abs(), d = x.den();
  while (true) {
    BigInt a, r;
    BigInt::divmod(n, d, a, r);
    BigInt p2 = a * p1 + p0;
    BigInt q2 = a * q1 + q0;
    if (q2 > max_den) {
      // Largest semiconvergent k*p1+p0 / k*q1+q0 with denominator in range.
      BigInt k = (max_den - q0) / q1;
      Rat semi(k * p1 + p0, k * q1 + q0);
      Rat conv(p1, q1);
      Rat target(n, d);
      Rat best = (abs(target - semi) < abs(target - conv)) ? semi : conv;
      return x.sign() < 0 ? -best : best;
    }
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    if (r.is_zero()) return x.sign() < 0 ? -Rat(p1, q1) : Rat(p1, q1);
    n = d;
    d = r;
  }
}

double Rat::to_double() const {
  if (num_.is_zero()) return 0.0;
  // Scale so the division happens on ~18 significant decimal digits.
  BigInt n = num_.abs();
  BigInt d = den_;
  int scale10 = 0;
  const BigInt ten(10);
  const BigInt big(1000000000000000000ll);
  while (n < d) {
    n *= ten;
    --scale10;
  }
  while (d * big > n) {
    n *= ten;
    --scale10;
  }
  while (n > d * big * ten) {
    d *= ten;
    ++scale10;
  }
  BigInt q, r;
  BigInt::divmod(n, d, q, r);
  double v = q.to_double() * std::pow(10.0, scale10);
  return num_.is_negative() ? -v : v;
}

std::string Rat::to_string() const {
  if (den_ == BigInt(1)) return num_.to_string();
  return num_.to_string() + "/" + den_.to_string();
}

}  // namespace adwords
