#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "pforge/certify.hpp"
#include "pforge/constructions.hpp"
#include "pforge/error.hpp"

using namespace pforge;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

MassFamily geometric(const ExactPosReal& C, const Rational& a, const ExactPosReal& rho) {
  MassFamily f;
  f.kind = StrandKind::GeometricP;
  f.q = 1;
  f.C = C;
  f.a = a;
  f.rho = rho;
  return f;
}

Target lq(const Rational& v) { return Target{Target::Kind::Lq, v}; }

}  // namespace

TEST(Certify, HarmonicDiverges) {
  MassFamily f = geometric(ExactPosReal(), Rational(1), ExactPosReal());
  Verdict v = series_verdict(f);
  EXPECT_FALSE(v.converges);
  EXPECT_EQ(v.cert.type, CertType::HarmonicComparison);
  EXPECT_EQ(v.cert.exponent, 1);
  EXPECT_TRUE(replay(f, v).ok);
}

TEST(Certify, RatioTestConverges) {
  ExactPosReal rho = ExactPosReal::power(q(1, 2), q(1, 2));
  MassFamily f = geometric(ExactPosReal(), q(1, 2), rho);
  Verdict v = series_verdict(f);
  EXPECT_TRUE(v.converges);
  EXPECT_EQ(v.cert.type, CertType::RatioTest);
  EXPECT_TRUE(v.cert.rho == rho);
  EXPECT_TRUE(replay(f, v).ok) << replay(f, v).message;
  ASSERT_TRUE(v.bound.has_value());
  oracle::Real s;
  for (unsigned long m = 1; m <= 300; ++m) {
    oracle::Real a = oracle::power(Rational(m), q(-1, 2));
    oracle::Real b = oracle::power(Rational(2), q(-static_cast<long>(m), 2));
    mpfr_mul(a.get(), a.get(), b.get(), MPFR_RNDN);
    mpfr_add(s.get(), s.get(), a.get(), MPFR_RNDN);
  }
  EXPECT_TRUE(oracle::encloses(*v.bound, s));
}

TEST(Certify, GeometricGrowthCrossover) {
  // m^-2/3 2^m/3
  MassFamily f = geometric(ExactPosReal(), q(2, 3), ExactPosReal::power(Rational(2), q(1, 3)));
  Verdict v = series_verdict(f);
  EXPECT_FALSE(v.converges);
  EXPECT_EQ(v.cert.type, CertType::GeometricGrowth);
  // exact crossover: least m past from_index with 2^m >= m^2
  std::uint64_t expect = 0;
  for (std::uint64_t m = v.cert.from_index;; ++m) {
    Integer lhs, rhs = Integer(static_cast<unsigned long>(m)) * Integer(static_cast<unsigned long>(m));
    mpz_ui_pow_ui(lhs.get_mpz_t(), 2, m);
    if (lhs >= rhs) {
      expect = m;
      break;
    }
  }
  EXPECT_EQ(v.cert.crossover, expect);
  EXPECT_TRUE(replay(f, v).ok);
  DivergenceIndex idx = divergence_witness_index(f, v, Rational(10));
  ASSERT_TRUE(idx.index.fits_ulong_p());
  // partial sums at the predicted index exceed 10
  double sum = 0;
  for (unsigned long m = 1; m <= idx.index.get_ui(); ++m) sum += std::pow(m, -2.0 / 3) * std::pow(2.0, m / 3.0);
  EXPECT_GT(sum, 10);
}

TEST(Certify, HarmonicDivergenceIndexAgreesWithMpfr) {
  MassFamily f = geometric(ExactPosReal(), Rational(1), ExactPosReal());
  Verdict v = series_verdict(f);
  DivergenceIndex idx = divergence_witness_index(f, v, Rational(10));
  EXPECT_TRUE(idx.dyadic);
  ASSERT_TRUE(idx.index.fits_ulong_p());
  ASSERT_LE(idx.index.get_ui(), 1ul << 22);
  EXPECT_GT(oracle::harmonic(idx.index.get_ui()).to_double(), 10);
}

TEST(Certify, PropertyReplayRejectsTamperedCertificates) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 40; ++t) {
    Rational a = q(static_cast<long>(rng() % 7), 1 + static_cast<long>(rng() % 3));
    ExactPosReal rho = ExactPosReal::power(q(1 + static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 5)),
                                           q(1, 1 + static_cast<long>(rng() % 3)));
    MassFamily f = geometric(ExactPosReal(q(1 + static_cast<long>(rng() % 9), 4)), a, rho);
    Verdict v = series_verdict(f, false);
    EXPECT_TRUE(replay(f, v).ok) << f.describe() << ": " << replay(f, v).message;
    Verdict bad = v;
    bad.converges = !v.converges;
    switch (v.cert.type) {
      case CertType::RatioTest: bad.cert.rho = ExactPosReal(Rational(2)); break;
      case CertType::GeometricGrowth: bad.cert.rho = ExactPosReal(q(1, 2)); break;
      default: bad.cert.exponent = v.cert.exponent + 1; break;
    }
    EXPECT_FALSE(replay(f, bad).ok) << f.describe();
  }
}

TEST(Certify, NowhereReportOnHA) {
  Witness w = build_hA(SpaceModel::unit_interval(), Rational(1));
  Report r = nowhere_report(w, lq(Rational(2)), 30);
  EXPECT_TRUE(r.granted);
  EXPECT_TRUE(r.uniform);
  EXPECT_EQ(r.verdicts.size(), 31u);
  for (const auto& bv : r.verdicts) EXPECT_FALSE(bv.verdict.converges);
  EXPECT_EQ(r.uniform_through, (std::uint64_t{1} << 31) - 2);
}

TEST(Certify, NowhereLinfOnAlgebraElement) {
  Witness w = algebra_generator_eval({2, 3}, PolynomialExpr::parse("x0*x1", 2), Rational(1));
  Report r = nowhere_report(w, Target{Target::Kind::Linf, Rational(0)}, 10);
  EXPECT_TRUE(r.granted);
  for (const auto& bv : r.verdicts) {
    EXPECT_EQ(bv.verdict.cert.type, CertType::UnboundedValues);
    EXPECT_EQ(bv.verdict.cert.theta1, 6);
  }
}

TEST(Certify, SimpleFunctionIsDenied) {
  Witness w = build_simple(SpaceModel::unit_interval(), Rational(1), {{dyadic(1, 0), Rational(3)}});
  Report r = nowhere_report(w, lq(Rational(2)), 5);
  EXPECT_FALSE(r.granted);
  EXPECT_NE(r.reason.find("MissingResident"), std::string::npos) << r.reason;
}

TEST(Certify, IsometryOnDisjointMembers) {
  auto fam = build_basic_family(SpaceModel::unit_interval(), Rational(1), 2, BasicMode::Sp);
  IsometryResult r = isometry_check(fam, {Rational(1), Rational(1)}, Rational(1));
  EXPECT_TRUE(r.within);
  auto fam2 = build_basic_family(SpaceModel::unit_interval(), Rational(2), 2, BasicMode::Sp);
  IsometryResult r2 = isometry_check(fam2, {q(3, 5), q(4, 5)}, Rational(2));
  EXPECT_TRUE(r2.within);
  EXPECT_TRUE(r2.pmass.intersects(Enclosure{1 - pow2(-16), 1 + pow2(-16), 0}));
}

TEST(Certify, IsometryDetectsOverlap) {
  Witness w = build_hA(SpaceModel::unit_interval(), Rational(1));
  try {
    isometry_check({w, w}, {Rational(1), Rational(1)}, Rational(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OverlapDetected);
  }
}

TEST(Certify, Freeness) {
  EXPECT_TRUE(freeness_check({2, 3}, PolynomialExpr::parse("x0 - x0", 2)).zero);
  FreenessResult r = freeness_check({2, 3}, PolynomialExpr::parse("x1 - x0", 2));
  EXPECT_FALSE(r.zero);
  EXPECT_EQ(r.j0, 2u);
  EXPECT_EQ(r.theta1, 3);
  EXPECT_EQ(r.beta1, 1);
}

TEST(Certify, ReportJsonCarriesClaim) {
  Witness w = build_hA(SpaceModel::unit_interval(), Rational(1));
  Report r = p_report(w);
  auto j = r.to_json();
  EXPECT_EQ(j.at("granted"), true);
  EXPECT_FALSE(j.contains("seconds"));
}
