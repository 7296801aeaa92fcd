#include <gtest/gtest.h>

#include "pforge/error.hpp"
#include "pforge/ledger.hpp"

using namespace pforge;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

}  // namespace

TEST(Ledger, FirstAllocationLeavesReservedSibling) {
  CarrierLedger ledger(SpaceModel::unit_interval());
  const CarrierRecord& c = ledger.allocate_carrier(0, q(1, 8));
  EXPECT_EQ(c.base_index, 0u);
  EXPECT_TRUE(contains(*dyadic(1, 0), *c.host));
  EXPECT_EQ(c.mass, q(1, 8));
  bool reserved = false;
  for (const auto& r : ledger.registry())
    if (interval_bounds(*r) == std::make_pair(q(1, 4), q(1, 2))) reserved = true;
  EXPECT_TRUE(reserved);
}

TEST(Ledger, SecondAllocationIsDisjoint) {
  CarrierLedger ledger(SpaceModel::unit_interval());
  ledger.allocate_carrier(0, q(1, 8));
  const CarrierRecord& second = ledger.allocate_carrier(1, q(1, 16));
  EXPECT_TRUE(contains(*dyadic(1, 0), *second.host));
  EXPECT_TRUE(disjoint(*ledger.carriers()[0].host, *second.host));
  EXPECT_NO_THROW(ledger.verify());
}

TEST(Ledger, BudgetExceeded) {
  CarrierLedger ledger(SpaceModel::unit_interval());
  try {
    ledger.allocate_carrier(1, q(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BudgetExceeded);
  }
}

TEST(Ledger, PropertyManyAllocationsStayDisjoint) {
  for (const auto& model : {SpaceModel::unit_interval(), SpaceModel::cantor(), SpaceModel::half_line()}) {
    CarrierLedger ledger(model);
    for (std::uint64_t n = 0; n < 40; ++n) ledger.allocate_within(n, pow2(-static_cast<long>(n) - 2));
    EXPECT_NO_THROW(ledger.verify()) << model.name();
    const auto& cs = ledger.carriers();
    for (std::size_t i = 0; i < cs.size(); ++i) {
      EXPECT_TRUE(contains(*enumerate_base(model, cs[i].base_index), *cs[i].host));
      for (std::size_t j = 0; j < i; ++j)
        EXPECT_TRUE(disjoint(*ledger.whole(cs[i].id), *ledger.whole(cs[j].id))) << i << " " << j;
    }
  }
}

TEST(Ledger, CeilLog2Factorial) {
  Integer f = 1;
  for (unsigned long j = 1; j <= 300; ++j) {
    f *= j;
    // least e with 2^e >= j!
    std::uint64_t e = 0;
    Integer t = 1;
    while (t < f) {
      t *= 2;
      ++e;
    }
    EXPECT_EQ(ceil_log2_factorial(j), e) << j;
  }
}

TEST(Ledger, GeometricBlocksHalving) {
  auto mu = geometric_blocks(Rational(1), [](std::uint64_t) { return q(1, 2); }, 20);
  Rational sum = 0;
  for (std::size_t n = 0; n < mu.size(); ++n) {
    EXPECT_EQ(mu[n], pow2(-static_cast<long>(n) - 2)) << n;
    sum += mu[n];
  }
  EXPECT_LT(sum, 1);
}

TEST(Ledger, GeometricBlocksFactorialRatio) {
  auto mu = geometric_blocks(Rational(1), [](std::uint64_t n) { return q(1, static_cast<long>(n)); }, 64);
  Rational sum = 0;
  for (std::size_t n = 0; n + 1 < mu.size(); ++n) {
    EXPECT_LE(mu[n + 1], mu[n] / static_cast<unsigned long>(n + 1)) << n;
    sum += mu[n];
  }
  EXPECT_LT(sum, 1);
}

TEST(Ledger, GeometricBlocksScaled) {
  auto mu = geometric_blocks(q(1, 4), [](std::uint64_t) { return q(1, 2); }, 30);
  Rational sum = 0;
  for (const auto& m : mu) {
    EXPECT_GT(m, 0);
    sum += m;
  }
  EXPECT_LT(sum, q(1, 4));
}

TEST(Ledger, FatCantorMeasure) {
  FatCantor c = nowhere_dense_subset(DyadicInterval{0, 0}, q(1, 2));
  EXPECT_EQ(c.measure_at(0), 1);
  // exact stage bookkeeping
  for (std::size_t t = 1; t <= 3; ++t) {
    auto prev = c.intervals(t - 1);
    auto cur = c.intervals(t);
    ASSERT_EQ(cur.size(), 2 * prev.size());
    Rational kept = 0;
    for (const auto& [a, b] : cur) kept += b - a;
    EXPECT_EQ(kept, c.measure_at(t));
  }
  EXPECT_GT(c.measure_at(3), q(1, 2));
  EXPECT_GT(c.limit_measure(), q(1, 2));
}
