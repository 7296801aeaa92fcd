#include <gtest/gtest.h>

#include <random>

#include "pforge/error.hpp"
#include "pforge/spaces.hpp"

using namespace pforge;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

}  // namespace

TEST(Spaces, Measures) {
  EXPECT_EQ(measure(*dyadic(3, 5)), q(1, 8));
  EXPECT_EQ(measure(*cylinder("101")), q(1, 8));
  EXPECT_EQ(measure(*rectangle(cylinder("10"), cylinder("01"))), q(1, 16));
  EXPECT_EQ(measure(*make_set(IndexRange{3, 10})), 7);
  EXPECT_EQ(measure(*disjoint_union({dyadic(2, 0), dyadic(3, 7)})), q(3, 8));
}

TEST(Spaces, Containment) {
  EXPECT_TRUE(contains(*dyadic(2, 1), *dyadic(3, 2)));
  EXPECT_TRUE(contains(*cylinder("10"), *cylinder("101")));
  EXPECT_FALSE(contains(*dyadic(1, 1), *dyadic(1, 0)));
  EXPECT_FALSE(contains(*cylinder("101"), *cylinder("10")));
}

TEST(Spaces, MismatchedLeavesAreIncomparable) {
  try {
    contains(*dyadic(1, 0), *cylinder("0"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IncomparableModels);
  }
}

TEST(Spaces, Disjointness) {
  EXPECT_TRUE(disjoint(*dyadic(2, 0), *dyadic(2, 1)));
  EXPECT_FALSE(disjoint(*dyadic(1, 0), *dyadic(3, 3)));
  EXPECT_TRUE(disjoint(*cylinder("01"), *cylinder("00")));
  EXPECT_TRUE(disjoint(*rectangle(cylinder("0"), cylinder("1")), *rectangle(cylinder("0"), cylinder("0"))));
}

TEST(Spaces, EnumerateUnitInterval) {
  auto u0 = enumerate_base(SpaceModel::unit_interval(), 0);
  auto u4 = enumerate_base(SpaceModel::unit_interval(), 4);
  EXPECT_EQ(interval_bounds(*u0), std::make_pair(q(0), q(1)));
  EXPECT_EQ(interval_bounds(*u4), std::make_pair(q(1, 4), q(1, 2)));
}

TEST(Spaces, EnumerateCantor) {
  EXPECT_EQ(enumerate_base(SpaceModel::cantor(), 1)->as<Cylinder>()->stem, "0");
  EXPECT_EQ(enumerate_base(SpaceModel::cantor(), 2)->as<Cylinder>()->stem, "1");
}

TEST(Spaces, PropertyBaseIndexInvertsEnumeration) {
  for (const auto& model : {SpaceModel::unit_interval(), SpaceModel::cantor(), SpaceModel::half_line()}) {
    for (std::uint64_t n = 0; n < 300; ++n) {
      auto s = enumerate_base(model, n);
      auto back = base_index_of(model, *s);
      ASSERT_TRUE(back.has_value()) << model.name() << " " << n;
      EXPECT_EQ(*back, n) << model.name();
    }
  }
}

TEST(Spaces, PropertyPairing) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 1000; ++t) {
    std::uint64_t a = rng() % 5000, b = rng() % 5000;
    EXPECT_EQ(unpair(pair(a, b)), std::make_pair(a, b));
  }
  for (std::uint64_t n = 0; n < 2000; ++n) EXPECT_EQ(pair(unpair(n).first, unpair(n).second), n);
}

TEST(Spaces, PropertyStemDyadicBijection) {
  for (int len = 0; len <= 10; ++len)
    for (unsigned long k = 0; k < (1ul << len); ++k) {
      std::string s = stem_of(len, Integer(k));
      ASSERT_EQ(static_cast<int>(s.size()), len);
      auto [l, i] = dyadic_of(s);
      EXPECT_EQ(l, len);
      EXPECT_EQ(i, k);
    }
}

TEST(Spaces, ModelNames) {
  for (const auto& m : {SpaceModel::unit_interval(), SpaceModel::half_line(), SpaceModel::cantor(),
                        SpaceModel::counting(),
                        SpaceModel::product(SpaceModel::cantor(), SpaceModel::unit_interval())})
    EXPECT_TRUE(SpaceModel::parse(m.name()) == m) << m.name();
  EXPECT_TRUE(SpaceModel::unit_interval().is_probability());
  EXPECT_TRUE(SpaceModel::half_line().has_infinite_measure());
  EXPECT_FALSE(SpaceModel::counting().is_atomless());
}

TEST(Spaces, FatCantorStageIntervals) {
  // Stage 0 is the whole interval; every stage is nested in the previous one.
  auto s0 = fat_cantor_stage_interval(q(0), q(1), "");
  EXPECT_EQ(s0.second - s0.first, q(1, 2) + q(1, 2));
  std::string addr;
  auto prev = s0;
  for (int k = 0; k < 8; ++k) {
    addr += (k % 2) ? '1' : '0';
    auto cur = fat_cantor_stage_interval(q(0), q(1), addr);
    EXPECT_LE(prev.first, cur.first);
    EXPECT_LE(cur.second, prev.second);
    EXPECT_EQ(cur.second - cur.first, pow2(-(k + 2)) + pow2(-(2 * k + 3)));
    prev = cur;
  }
}
