#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "pforge/error.hpp"
#include "pforge/exactnum.hpp"

using namespace pforge;

namespace {

ExactPosReal pw(long b, long num, long den) { return ExactPosReal::power(Rational(b), Rational(num, den)); }

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

}  // namespace

TEST(ExactNum, ParseRational) {
  EXPECT_EQ(parse_rational("3/4"), q(3, 4));
  EXPECT_EQ(parse_rational("-6/8"), q(-3, 4));
  EXPECT_EQ(parse_rational("1.25"), q(5, 4));
  EXPECT_EQ(parse_rational("2^-3"), q(1, 8));
  EXPECT_THROW(parse_rational("abc"), Error);
}

TEST(ExactNum, CompareIrrationalPowers) {
  EXPECT_EQ(compare(pw(2, 1, 2), pw(3, 1, 3)), Ordering::Less);
  EXPECT_EQ(compare(ExactPosReal::power(q(1, 2), q(1, 2)), ExactPosReal()), Ordering::Less);
  ExactPosReal x = pw(7, 2, 5) * pw(3, -1, 3);
  EXPECT_EQ(compare(x, x), Ordering::Equal);
}

TEST(ExactNum, CanonicalPowers) {
  EXPECT_TRUE(ExactPosReal::power(q(1, 4), q(3, 2)) == ExactPosReal(q(1, 8)));
  EXPECT_TRUE(pw(2, 1, 3).pow(Rational(3)) == ExactPosReal(2));
  ExactPosReal r = ExactPosReal::power(q(1, 5), q(1, 2));
  EXPECT_EQ(r.to_string(), "5^(-1/2)");
  EXPECT_TRUE(r.is_rational() == false);
  // 8^(1/2) reduces to the primitive base: 2^(3/2)
  ExactPosReal e = pw(8, 1, 2);
  EXPECT_EQ(e.scale(), 1);
  ASSERT_EQ(e.factors().size(), 1u);
  EXPECT_EQ(e.factors()[0].base, 2);
  EXPECT_EQ(e.factors()[0].exponent, q(3, 2));
}

TEST(ExactNum, IntegerExponentProductsStayRational) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    long b1 = 1 + static_cast<long>(rng() % 40), b2 = 1 + static_cast<long>(rng() % 40);
    long e1 = static_cast<long>(rng() % 9) - 4, e2 = static_cast<long>(rng() % 9) - 4;
    ExactPosReal x = pw(b1, e1, 1) * pw(b2, e2, 1);
    EXPECT_TRUE(x.is_rational());
    EXPECT_EQ(x.scale(), pow_int(Rational(b1), e1) * pow_int(Rational(b2), e2));
  }
}

TEST(ExactNum, PropertyCompareAgreesWithMpfr) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 300; ++t) {
    ExactPosReal x = pw(2 + static_cast<long>(rng() % 30), static_cast<long>(rng() % 13) - 6, 1 + static_cast<long>(rng() % 5));
    ExactPosReal y = pw(2 + static_cast<long>(rng() % 30), static_cast<long>(rng() % 13) - 6, 1 + static_cast<long>(rng() % 5));
    oracle::Real vx = oracle::value(x), vy = oracle::value(y);
    int c = mpfr_cmp(vx.get(), vy.get());
    Ordering o = compare(x, y);
    if (o == Ordering::Equal) {
      EXPECT_TRUE(x.to_string() == y.to_string());
    } else {
      EXPECT_EQ(o == Ordering::Less, c < 0) << x.to_string() << " vs " << y.to_string();
    }
  }
}

TEST(ExactNum, PropertyTextRoundtripAndInverse) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 200; ++t) {
    ExactPosReal x = pw(2 + static_cast<long>(rng() % 50), static_cast<long>(rng() % 11) - 5, 1 + static_cast<long>(rng() % 6)) *
                     ExactPosReal(q(1 + static_cast<long>(rng() % 20), 1 + static_cast<long>(rng() % 20)));
    EXPECT_TRUE(ExactPosReal::parse(x.to_string()) == x) << x.to_string();
    EXPECT_TRUE(x * x.inverse() == ExactPosReal());
    EXPECT_TRUE(x.pow(q(2, 3)).pow(q(3, 2)) == x);
  }
}

TEST(ExactNum, PropertyEncloseContainsMpfrValue) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 200; ++t) {
    ExactPosReal x = pw(2 + static_cast<long>(rng() % 97), static_cast<long>(rng() % 21) - 10, 1 + static_cast<long>(rng() % 7));
    Enclosure e = enclose(x, 60);
    EXPECT_TRUE(oracle::encloses(e, oracle::value(x))) << x.to_string() << " " << e.to_string();
    EXPECT_LE(e.width(), e.hi * pow2(-55));
  }
}

TEST(ExactNum, RootBounds) {
  Enclosure e = root_bounds(Rational(2), 2, 64);
  EXPECT_LE(e.lo * e.lo, 2);
  EXPECT_GE(e.hi * e.hi, 2);
  EXPECT_LE(e.width(), pow2(-60));
}

TEST(ExactNum, SumOfGeometricPSeries) {
  // sum m^-1/2 2^-m/2
  TermGenerator g;
  g.term = [](std::uint64_t m) {
    return ExactPosReal::power(Rational(static_cast<unsigned long>(m)), q(-1, 2)) *
           ExactPosReal::power(Rational(2), q(-static_cast<long>(m), 2));
  };
  // tail after N <= 2^-(N+1)/2 / (1 - 2^-1/2) <= 2^-floor((N+1)/2) * 342/100
  g.tail_bound = [](std::uint64_t N) -> std::optional<Rational> {
    return pow2(-static_cast<long>((N + 1) / 2)) * q(342, 100);
  };
  Enclosure e = enclose_sum(g, pow2(-10));
  EXPECT_LE(e.width(), pow2(-10));
  oracle::Real s;
  for (unsigned long m = 1; m <= 400; ++m) {
    oracle::Real a = oracle::power(Rational(m), q(-1, 2));
    oracle::Real b = oracle::power(Rational(2), q(-static_cast<long>(m), 2));
    mpfr_mul(a.get(), a.get(), b.get(), MPFR_RNDN);
    mpfr_add(s.get(), s.get(), a.get(), MPFR_RNDN);
  }
  EXPECT_TRUE(oracle::encloses(e, s));
}

TEST(ExactNum, SingleTermSum) {
  TermGenerator g;
  g.term = [](std::uint64_t) { return ExactPosReal(q(3, 4)); };
  g.last = 1;
  Enclosure e = enclose_sum(g, pow2(-20));
  EXPECT_EQ(e.lo, q(3, 4));
  EXPECT_EQ(e.hi, q(3, 4));
}

TEST(ExactNum, HarmonicHasNoTailBound) {
  TermGenerator g;
  g.term = [](std::uint64_t m) { return ExactPosReal(q(1, static_cast<long>(m))); };
  g.tail_bound = [](std::uint64_t) { return std::optional<Rational>(); };
  try {
    enclose_sum(g, pow2(-4));
    FAIL() << "expected NoTailBound";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoTailBound);
  }
}

TEST(ExactNum, EnclosureArithmetic) {
  Enclosure a{q(1), q(2), 0};
  Enclosure b{q(3), q(5), 0};
  Enclosure s = a + b;
  EXPECT_EQ(s.lo, 4);
  EXPECT_EQ(s.hi, 7);
  Enclosure p = a * b;
  EXPECT_EQ(p.lo, 3);
  EXPECT_EQ(p.hi, 10);
  Enclosure r = reciprocal(b);
  EXPECT_EQ(r.lo, q(1, 5));
  EXPECT_EQ(r.hi, q(1, 3));
  EXPECT_TRUE(a.intersects(Enclosure{q(2), q(9), 0}));
  EXPECT_FALSE(a.intersects(b));
}
