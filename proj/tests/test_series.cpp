#include <gtest/gtest.h>

#include "oracle.hpp"
#include "pforge/constructions.hpp"
#include "pforge/error.hpp"
#include "pforge/series.hpp"

using namespace pforge;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

// |coeff(m)| = (2^m / m)^(1/2) on mass 2^-m: the first strand of the
// unit-interval construction at p = 1, r = 2, before normalization.
Strand h_strand() {
  Strand s;
  s.A = ExactPosReal();
  s.alpha = q(1, 2);
  s.delta = ExactPosReal::power(Rational(2), q(1, 2));
  s.B = 1;
  s.gamma = q(1, 2);
  s.placement.base = dyadic(0, 0);
  return s;
}

// |coeff(m)| = 1 / (m 2^(m-10)) on mass 2^(m-10).
Strand g_strand() {
  Strand s;
  s.A = ExactPosReal(Rational(1024));
  s.alpha = 1;
  s.delta = ExactPosReal(q(1, 2));
  s.B = q(1, 1024);
  s.gamma = 2;
  s.placement.base = dyadic(0, 0);
  return s;
}

// |coeff(m)|^q mass(m) evaluated term by term from the strand.
ExactPosReal direct_term(const Strand& s, std::uint64_t m, const Rational& exponent) {
  return s.abs_coeff(m)->pow(exponent) * ExactPosReal(s.mass(m));
}

}  // namespace

TEST(Series, HStrandAtTwoIsHarmonic) {
  MassFamily f = q_mass_family(h_strand(), Rational(2));
  for (std::uint64_t m = 1; m <= 100; ++m)
    EXPECT_TRUE(*f.term(m) == ExactPosReal(q(1, static_cast<long>(m)))) << m;
}

TEST(Series, HStrandAtOneMatchesDirectTerms) {
  Strand s = h_strand();
  MassFamily f = q_mass_family(s, Rational(1));
  for (std::uint64_t m = 1; m <= 50; ++m) {
    ExactPosReal closed = ExactPosReal::power(Rational(static_cast<unsigned long>(m)), q(-1, 2)) *
                          ExactPosReal::power(Rational(2), q(-static_cast<long>(m), 2));
    EXPECT_TRUE(*f.term(m) == closed) << m;
    EXPECT_TRUE(*f.term(m) == direct_term(s, m, Rational(1))) << m;
  }
}

TEST(Series, HStrandNormMatchesOracle) {
  MassFamily f = q_mass_family(h_strand(), Rational(1));
  Enclosure e = mass_enclosure(f, pow2(-30));
  oracle::Real s;
  for (unsigned long m = 1; m <= 300; ++m) {
    oracle::Real a = oracle::power(Rational(m), q(-1, 2));
    oracle::Real b = oracle::power(Rational(2), q(-static_cast<long>(m), 2));
    mpfr_mul(a.get(), a.get(), b.get(), MPFR_RNDN);
    mpfr_add(s.get(), s.get(), a.get(), MPFR_RNDN);
  }
  EXPECT_TRUE(oracle::encloses(e, s));
  EXPECT_LE(e.width(), pow2(-30));
}

TEST(Series, UnitStrandHasMassOne) {
  Strand s;
  s.A = ExactPosReal();
  s.alpha = 0;
  s.delta = ExactPosReal();
  s.B = 1;
  s.gamma = q(1, 2);
  Enclosure e = mass_enclosure(q_mass_family(s, Rational(1)), pow2(-20));
  EXPECT_TRUE(e.contains(Rational(1)));
}

TEST(Series, GStrandAtOneIsHarmonic) {
  Strand s = g_strand();
  MassFamily f = q_mass_family(s, Rational(1));
  for (std::uint64_t m = 1; m <= 60; ++m) {
    EXPECT_TRUE(*f.term(m) == ExactPosReal(q(1, static_cast<long>(m)))) << m;
    EXPECT_TRUE(*f.term(m) == direct_term(s, m, Rational(1))) << m;
  }
}

TEST(Series, DivergentFamilyHasNoEnclosure) {
  Strand s = g_strand();
  try {
    mass_enclosure(q_mass_family(s, Rational(1)), pow2(-10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoTailBound);
  }
}

TEST(Series, PropertyClosedFormMatchesDirectTerms) {
  for (const auto& exponent : {q(1, 2), q(3, 4), Rational(1), q(3, 2), Rational(2), Rational(3)}) {
    for (const Strand& s : {h_strand(), g_strand()}) {
      MassFamily f = q_mass_family(s, exponent);
      for (std::uint64_t m = 1; m <= 40; ++m) EXPECT_TRUE(*f.term(m) == direct_term(s, m, exponent));
    }
  }
}

TEST(Series, HarmonicBlocksAreMinimal) {
  for (std::uint64_t k = 0; k < 9; ++k) {
    std::uint64_t a = AlmostDisjointIndex::block_start(k);
    std::uint64_t b = AlmostDisjointIndex::block_start(k + 1);
    Rational s = 0;
    for (std::uint64_t t = a; t < b; ++t) s += Rational(1, static_cast<unsigned long>(t));
    EXPECT_GE(s, 1) << k;
    EXPECT_LT(s - Rational(1, static_cast<unsigned long>(b - 1)), 1) << k;
    EXPECT_EQ(AlmostDisjointIndex::block_of(a), k);
    EXPECT_EQ(AlmostDisjointIndex::block_of(b - 1), k);
  }
}

TEST(Series, AlmostDisjointSeeds) {
  auto a = AlmostDisjointIndex::parse("0|1");
  auto b = AlmostDisjointIndex::parse("001|0");
  std::size_t split = a.split_point(b);
  EXPECT_EQ(split, 1u);
  // Past the split the derived blocks never meet.
  for (std::size_t i = split + 1; i < 30; ++i) EXPECT_FALSE(b.in_derived(a.derived(i)));
  for (std::size_t i = 0; i < 20; ++i) EXPECT_TRUE(a.in_derived(a.derived(i)));
  try {
    a.split_point(AlmostDisjointIndex::parse("0|1"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SeedCollision);
  }
}

TEST(Series, FilterMembershipFollowsBlocks) {
  auto a = AlmostDisjointIndex::parse("01|10");
  for (std::uint64_t m = 1; m < 3000; ++m) EXPECT_EQ(a.contains(m), a.in_derived(AlmostDisjointIndex::block_of(m)));
  auto cut = a.after_block(5);
  EXPECT_EQ(AlmostDisjointIndex::parse(cut.seed()).seed(), cut.seed());
  for (std::uint64_t m = 1; m < 3000; ++m)
    EXPECT_EQ(cut.contains(m), a.contains(m) && AlmostDisjointIndex::block_of(m) > 5) << m;
}

TEST(Series, RestrictKeepsResidents) {
  BuildOptions opts;
  opts.horizon = 8;
  Witness w = build_hA(SpaceModel::unit_interval(), Rational(1), std::nullopt, opts);
  Witness all = restrict(w, 0);
  EXPECT_EQ(all.groups.size(), w.groups.size());
  // [1/2, 3/4) is base index 5
  Witness r = restrict(w, 5);
  bool found = false;
  for (const auto& g : r.groups) found = found || g.home == 5u;
  EXPECT_TRUE(found);
  for (const auto& g : r.groups) EXPECT_TRUE(contains(*dyadic(2, 2), *g.support));
}

TEST(Series, RestrictOfEmptyIsEmpty) {
  Witness w = build_simple(SpaceModel::unit_interval(), Rational(1), {});
  Witness r = restrict(w, 3);
  EXPECT_TRUE(r.groups.empty());
  EXPECT_EQ(r.norm.hi, 0);
}
