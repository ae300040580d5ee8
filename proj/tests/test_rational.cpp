#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>

#include "adwords/instance.hpp"
#include "adwords/rational.hpp"

using namespace adwords;

TEST_CASE("bigint matches int64 arithmetic on random values") {
  SplitMix64 rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    auto a = static_cast<std::int64_t>(rng.next() % 2000003) - 1000001;
    auto b = static_cast<std::int64_t>(rng.next() % 2000003) - 1000001;
    BigInt A(a), B(b);
    CHECK((A + B).to_int64() == a + b);
    CHECK((A - B).to_int64() == a - b);
    CHECK((A * B).to_int64() == a * b);
    if (b != 0) {
      CHECK((A / B).to_int64() == a / b);
      CHECK((A % B).to_int64() == a % b);
    }
    CHECK((A < B) == (a < b));
  }
}

TEST_CASE("bigint long division on multi-limb values") {
  // (n * d + r) / d == n with remainder r for huge n, d.
  BigInt n = BigInt::from_string("123456789012345678901234567890123456789");
  BigInt d = BigInt::from_string("98765432109876543210987");
  BigInt r = BigInt::from_string("12345678901234567");
  BigInt num = n * d + r;
  BigInt q, rem;
  BigInt::divmod(num, d, q, rem);
  CHECK(q == n);
  CHECK(rem == r);
  CHECK(num.to_string() ==
        "12193263113702179522618422493004842249299264910964357105775310");
}

TEST_CASE("bigint string round trip and pow") {
  CHECK(BigInt::pow(BigInt(2), 100).to_string() ==
        "1267650600228229401496703205376");
  CHECK(BigInt::from_string("-987654321987654321").to_int64() ==
        -987654321987654321ll);
  CHECK(BigInt(0).to_string() == "0");
  CHECK(BigInt::gcd(BigInt::pow(BigInt(6), 30), BigInt::pow(BigInt(15), 30)) ==
        BigInt::pow(BigInt(3), 30));
}

TEST_CASE("rational arithmetic stays reduced") {
  Rat a(1, 3), b(1, 6);
  CHECK(a + b == Rat(1, 2));
  CHECK(a - b == Rat(1, 6));
  CHECK(a * b == Rat(1, 18));
  CHECK(a / b == Rat(2));
  CHECK((a + b).den() == BigInt(2));
  CHECK(Rat(-4, -8) == Rat(1, 2));
  CHECK(Rat(4, -8) == Rat(-1, 2));
  CHECK(Rat(0, 7).den() == BigInt(1));
}

TEST_CASE("rational field identities on random values") {
  SplitMix64 rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    auto draw = [&]() {
      return Rat(static_cast<std::int64_t>(rng.next() % 2001) - 1000,
                 static_cast<std::int64_t>(rng.next() % 999) + 1);
    };
    Rat a = draw(), b = draw(), c = draw();
    CHECK((a + b) * c == a * c + b * c);
    CHECK(a + b - b == a);
    if (!c.is_zero()) CHECK(a * c / c == a);
    CHECK(((a < b) || (b < a) || (a == b)));
  }
}

TEST_CASE("decimal parsing is exact") {
  CHECK(Rat::parse("0.05144") == Rat(643, 12500));
  CHECK(Rat::parse("0.44285") == Rat(44285, 100000));
  CHECK(Rat::parse("3/7") == Rat(3, 7));
  CHECK(Rat::parse("-2.5") == Rat(-5, 2));
  CHECK(Rat::parse("42") == Rat(42));
}

TEST_CASE("from_double_exact inverts to_double on dyadics") {
  CHECK(Rat::from_double_exact(0.375) == Rat(3, 8));
  CHECK(Rat::from_double_exact(-1.0) == Rat(-1));
  CHECK(Rat::from_double_exact(0.0) == Rat(0));
  double x = 0.1;
  Rat r = Rat::from_double_exact(x);
  CHECK(r.to_double() == doctest::Approx(x).epsilon(1e-15));
}

TEST_CASE("to_double accuracy on large denominators") {
  Rat g(643, 12500);
  Rat x = Rat::pow(Rat(1) - g, 40) / Rat::pow(Rat(2), 40);
  double expect = std::pow(1 - 0.05144, 40) / std::pow(2.0, 40);
  CHECK(x.to_double() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rationalize finds continued-fraction approximants") {
  Rat pi(314159265358979ll, 100000000000000ll);
  Rat approx = Rat::rationalize(pi, BigInt(1000));
  CHECK(approx.den() <= BigInt(1000));
  CHECK(abs(approx - pi) < Rat(1, 100000));
  // Exact inputs with a small denominator pass through unchanged.
  CHECK(Rat::rationalize(Rat(2, 3), BigInt(10)) == Rat(2, 3));
}
