#include <gtest/gtest.h>

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

Target lq(const Rational& v) { return Target{Target::Kind::Lq, v}; }

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

const Witness& hA() {
  static const Witness w = build_hA(SpaceModel::unit_interval(), Rational(1));
  return w;
}

}  // namespace

TEST(Constructions, RSequenceDefaults) {
  RSequence dec = RSequence::decreasing_default(Rational(1));
  EXPECT_EQ(dec.at(1), 2);
  EXPECT_EQ(dec.at(2), q(3, 2));
  EXPECT_EQ(dec.first_reaching(q(3, 2)), 2u);
  RSequence inc = RSequence::increasing_default(Rational(2));
  EXPECT_EQ(inc.at(1), 1);
  EXPECT_EQ(inc.at(2), q(3, 2));
  EXPECT_EQ(inc.first_reaching(Rational(1)), 1u);
  RSequence bad = dec;
  bad.prefix = {Rational(3), Rational(4)};
  EXPECT_EQ(code_of([&] { bad.validate(); }), ErrorCode::InvalidRSequence);
}

TEST(Constructions, HAIsNormOne) {
  const Witness& w = hA();
  EXPECT_EQ(w.horizon, 30u);
  EXPECT_TRUE(w.norm_certified);
  EXPECT_TRUE(w.norm.contains(Rational(1)));
  EXPECT_LE(w.norm.width(), pow2(-16));
  for (std::size_t i = 0; i < w.groups.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_TRUE(disjoint(*w.groups[i].support, *w.groups[j].support));
}

TEST(Constructions, HAStrandExponents) {
  const Group& g = hA().groups.front();
  // strand 1 at q = r_1 = 2: terms proportional to 1/m
  MassFamily f2 = q_mass_family(g.strand(1), Rational(2));
  EXPECT_EQ(f2.a, 1);
  EXPECT_TRUE(f2.rho == ExactPosReal());
  // strand 2 at q = r_2 = 3/2
  MassFamily f32 = q_mass_family(g.strand(2), q(3, 2));
  EXPECT_EQ(f32.a, 1);
  EXPECT_TRUE(f32.rho == ExactPosReal());
  // p-mass of strand 1: m^-1/2 (1/2)^(m/2), up to constants
  MassFamily f1 = q_mass_family(g.strand(1), Rational(1));
  EXPECT_EQ(f1.a, q(1, 2));
  EXPECT_TRUE(f1.rho == ExactPosReal::power(q(1, 2), q(1, 2)));
  EXPECT_EQ(series_verdict(f1, false).cert.type, CertType::RatioTest);
}

TEST(Constructions, HAEveryBaseIndexHasAResident) {
  const Witness& w = hA();
  for (std::uint64_t n = 0; n <= 30; ++n) EXPECT_FALSE(w.residents(n).empty()) << n;
}

TEST(Constructions, GBExponents) {
  Witness g = build_gB(SpaceModel::half_line(), Rational(2));
  EXPECT_TRUE(g.norm.contains(Rational(1)));
  const Group& grp = g.groups.front();
  MassFamily at1 = q_mass_family(grp.strand(1), Rational(1));
  EXPECT_EQ(at1.a, 1);
  EXPECT_TRUE(at1.rho == ExactPosReal());
  MassFamily p = q_mass_family(grp.strand(1), Rational(2));
  EXPECT_TRUE(series_verdict(p, false).converges);
  MassFamily half = q_mass_family(grp.strand(2), q(1, 2));
  Verdict v = series_verdict(half, false);
  EXPECT_FALSE(v.converges);
  EXPECT_EQ(v.cert.type, CertType::GeometricGrowth);
}

TEST(Constructions, GBNeedsInfiniteMeasure) {
  EXPECT_EQ(code_of([] { build_gB(SpaceModel::unit_interval(), Rational(2)); }), ErrorCode::ModelMismatch);
}

TEST(Constructions, BasicFamilyNormsAndDisjointness) {
  auto fam = build_basic_family(SpaceModel::unit_interval(), Rational(1), 2, BasicMode::Sp);
  ASSERT_EQ(fam.size(), 2u);
  for (const auto& w : fam) {
    EXPECT_TRUE(w.norm.contains(Rational(1)));
    EXPECT_LE(w.norm.width(), pow2(-19));
  }
  for (const auto& a : fam[0].groups)
    for (const auto& b : fam[1].groups) EXPECT_TRUE(disjoint(*a.support, *b.support));
  EXPECT_EQ(build_basic_family(SpaceModel::unit_interval(), Rational(1), 1, BasicMode::Sp).size(), 1u);
}

TEST(Constructions, SpPrimeDivergesOnBothSides) {
  auto fam = build_basic_family(SpaceModel::half_line(), Rational(1), 2, BasicMode::SpPrime);
  for (const auto& w : fam) {
    EXPECT_TRUE(w.norm.contains(Rational(1)));
    EXPECT_TRUE(global_divergence_report(w, q(1, 2)).granted);
    EXPECT_TRUE(nowhere_report(w, lq(Rational(2)), 6).granted);
  }
  EXPECT_EQ(code_of([] { build_basic_family(SpaceModel::unit_interval(), Rational(1), 2, BasicMode::SpPrime); }),
            ErrorCode::ModelMismatch);
}

TEST(Constructions, DenseGeneratorDeviation) {
  auto gens = build_dense_generators(SpaceModel::unit_interval(), Rational(1),
                                     {{dyadic(1, 0), 4, AlmostDisjointIndex::parse("0|1")}});
  Enclosure d = dense_deviation_norm(gens[0]);
  EXPECT_TRUE(d.contains(q(1, 4)));
  EXPECT_LE(d.width(), pow2(-19));
}

TEST(Constructions, DenseCombinationWithOppositeSigns) {
  auto gens = build_dense_generators(SpaceModel::unit_interval(), Rational(1),
                                     {{dyadic(1, 0), 2, AlmostDisjointIndex::parse("0|1")},
                                      {dyadic(1, 0), 2, AlmostDisjointIndex::parse("1|0")}});
  DenseCombinationReport r = dense_combination_certify({{Rational(1), &gens[0]}, {Rational(-1), &gens[1]}}, 6);
  EXPECT_TRUE(r.report.granted) << r.report.reason;
  EXPECT_EQ(code_of([&] { dense_combination_certify({{Rational(0), &gens[0]}, {Rational(0), &gens[1]}}); }),
            ErrorCode::AllZero);
}

TEST(Constructions, DenseSeedCollision) {
  EXPECT_EQ(code_of([] {
              build_dense_generators(SpaceModel::unit_interval(), Rational(1),
                                     {{dyadic(1, 0), 2, AlmostDisjointIndex::parse("0|1")},
                                      {dyadic(1, 1), 3, AlmostDisjointIndex::parse("0|1")}});
            }),
            ErrorCode::SeedCollision);
}

TEST(Constructions, DenseSharedBlocksAreCut) {
  // seeds agreeing on their first branch bits share the first derived blocks
  auto gens = build_dense_generators(SpaceModel::unit_interval(), Rational(1),
                                     {{dyadic(1, 0), 2, AlmostDisjointIndex::parse("001|0")},
                                      {dyadic(2, 1), 3, AlmostDisjointIndex::parse("000|1")}});
  auto a = AlmostDisjointIndex::parse("001|0");
  auto b = AlmostDisjointIndex::parse("000|1");
  std::size_t split = a.split_point(b);
  DenseCombinationReport r = dense_combination_certify({{Rational(1), &gens[0]}, {Rational(1), &gens[1]}}, 6);
  EXPECT_TRUE(r.report.granted);
  EXPECT_EQ(r.cut_block, a.derived(split));
}

TEST(Constructions, AlgebraElementValues) {
  Witness w = algebra_generator_eval({2, 3}, PolynomialExpr::parse("x0*x1", 2), Rational(1));
  EXPECT_TRUE(w.norm_certified);
  Strand s = w.groups.front().strand(1);
  for (std::uint64_t j = 1; j <= 12; ++j) {
    Integer six;
    mpz_ui_pow_ui(six.get_mpz_t(), 6, j);
    EXPECT_EQ(*s.factorial_value(j), Rational(six));
  }
  Report pr = p_report(w);
  EXPECT_TRUE(pr.granted);
  for (const auto& v : pr.verdicts) EXPECT_EQ(v.verdict.cert.type, CertType::FactorialRatio);
}

TEST(Constructions, AlgebraEdgeCases) {
  Witness zero = algebra_generator_eval({2, 3}, PolynomialExpr::parse("x0 - x0", 2), Rational(1));
  EXPECT_EQ(zero.norm.hi, 0);
  EXPECT_EQ(code_of([] { algebra_generator_eval({2, 3}, PolynomialExpr::parse("x0 + 3", 2), Rational(1)); }),
            ErrorCode::ConstantTerm);
  ExponentialSum es = evaluate_generators({2, 3}, PolynomialExpr::parse("x1 - x0", 2));
  EXPECT_EQ(es.dominance_threshold(), 2u);
}

TEST(Constructions, PropertyDominanceThresholdIsExact) {
  std::vector<std::string> polys{"x1 - x0", "2*x0 - x1", "x0*x1 - 5*x1^2", "x2^2 - 7*x0*x1 + x0", "3*x0^2 + x1"};
  for (const auto& text : polys) {
    ExponentialSum es = evaluate_generators({2, 3, 5}, PolynomialExpr::parse(text, 3));
    std::uint64_t j0 = es.dominance_threshold();
    const auto& [b1, t1] = es.terms.front();
    auto dominated = [&](std::uint64_t j) {
      Rational rest = 0;
      for (std::size_t i = 1; i < es.terms.size(); ++i) {
        Integer t;
        mpz_pow_ui(t.get_mpz_t(), es.terms[i].second.get_mpz_t(), j);
        rest += abs(es.terms[i].first) * Rational(t);
      }
      Integer lead;
      mpz_pow_ui(lead.get_mpz_t(), t1.get_mpz_t(), j);
      return 2 * rest < abs(b1) * Rational(lead);
    };
    if (j0 > 1) {
      EXPECT_FALSE(dominated(j0 - 1)) << text;
    }
    for (std::uint64_t j = j0; j < j0 + 40; ++j) EXPECT_TRUE(dominated(j)) << text << " j=" << j;
  }
}

TEST(Constructions, SimpleWitness) {
  Witness w = build_simple(SpaceModel::unit_interval(), Rational(1),
                           {{dyadic(1, 0), Rational(2)}, {dyadic(2, 3), Rational(-4)}});
  EXPECT_TRUE(w.norm.contains(Rational(2)));
  EXPECT_EQ(code_of([] {
              build_simple(SpaceModel::unit_interval(), Rational(1),
                           {{dyadic(1, 0), Rational(2)}, {dyadic(2, 1), Rational(1)}});
            }),
            ErrorCode::DisjointnessViolation);
}

TEST(Constructions, RebuildReproducesWitness) {
  BuildOptions opts;
  opts.horizon = 10;
  Witness w = build_hA(SpaceModel::cantor(), q(3, 2), std::nullopt, opts);
  Witness r = rebuild(w.params);
  EXPECT_EQ(r.params.dump(), w.params.dump());
  EXPECT_EQ(r.groups.size(), w.groups.size());
  EXPECT_EQ(r.norm.lo, w.norm.lo);
  EXPECT_EQ(r.norm.hi, w.norm.hi);
  for (std::size_t i = 0; i < w.groups.size(); ++i)
    EXPECT_EQ(r.groups[i].support->to_string(), w.groups[i].support->to_string());
}

TEST(Constructions, SetJsonRoundtrip) {
  for (const auto& s : {dyadic(3, 5), cylinder("0110"), make_set(IndexRange{4, 9})}) {
    EXPECT_EQ(set_from_json(set_to_json(*s))->to_string(), s->to_string());
  }
}
