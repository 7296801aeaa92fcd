#include <gtest/gtest.h>

#include <random>

#include "pforge/certify.hpp"
#include "pforge/constructions.hpp"
#include "pforge/error.hpp"
#include "pforge/transport.hpp"

using namespace pforge;

namespace {

Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

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

Witness small_hA(const SpaceModel& m) {
  BuildOptions opts;
  opts.horizon = 6;
  return build_hA(m, Rational(1), std::nullopt, opts);
}

std::string random_stem(std::mt19937_64& rng, std::size_t max_len) {
  std::string s(rng() % (max_len + 1), '0');
  for (auto& c : s) c = (rng() & 1) ? '1' : '0';
  return s;
}

}  // namespace

TEST(Transport, InterleaveCylinders) {
  auto r = interleave_image(rectangle(cylinder("10"), cylinder("01")), InterleaveDirection::Interleave);
  EXPECT_EQ(r->to_string(), cylinder("1001")->to_string());
  auto e = interleave_image(rectangle(cylinder(""), cylinder("")), InterleaveDirection::Interleave);
  EXPECT_EQ(e->to_string(), cylinder("")->to_string());
  auto back = interleave_image(cylinder("1001"), InterleaveDirection::Deinterleave);
  EXPECT_EQ(back->to_string(), rectangle(cylinder("10"), cylinder("01"))->to_string());
}

TEST(Transport, BinaryCylinderAndInterval) {
  auto i = binary_image(cylinder("101"), BinaryDirection::ToInterval);
  EXPECT_EQ(interval_bounds(*i), std::make_pair(q(5, 8), q(3, 4)));
  EXPECT_EQ(binary_image(dyadic(3, 5), BinaryDirection::ToCantor)->to_string(), cylinder("101")->to_string());
}

TEST(Transport, UnsupportedLeaf) {
  EXPECT_EQ(code_of([] { binary_image(make_set(IndexRange{0, 3}), BinaryDirection::ToCantor); }),
            ErrorCode::UnsupportedLeaf);
}

TEST(Transport, PropertyMeasurePreserved) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    auto a = cylinder(random_stem(rng, 12));
    auto b = cylinder(random_stem(rng, 12));
    auto x = binary_image(a, BinaryDirection::ToInterval);
    EXPECT_EQ(measure(*x), measure(*a));
    EXPECT_EQ(binary_image(x, BinaryDirection::ToCantor)->to_string(), a->to_string());
    auto rect = rectangle(a, b);
    auto g = interleave_image(rect, InterleaveDirection::Interleave);
    EXPECT_EQ(measure(*g), measure(*rect));
    // uneven stems come back as a finer partition of the same rectangle
    auto back = interleave_image(g, InterleaveDirection::Deinterleave);
    EXPECT_EQ(measure(*back), measure(*rect));
    EXPECT_TRUE(contains(*rect, *back));
    if (a->as<Cylinder>()->stem.size() == b->as<Cylinder>()->stem.size()) {
      EXPECT_EQ(back->to_string(), rect->to_string());
    }
  }
}

TEST(Transport, PropertyDisjointnessPreserved) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 300; ++t) {
    auto a = cylinder(random_stem(rng, 8));
    auto b = cylinder(random_stem(rng, 8));
    EXPECT_EQ(disjoint(*a, *b), disjoint(*binary_image(a, BinaryDirection::ToInterval),
                                         *binary_image(b, BinaryDirection::ToInterval)));
  }
}

TEST(Transport, WitnessRoundtrip) {
  Witness w = small_hA(SpaceModel::unit_interval());
  Witness f = apply_transport(TransportTag::F, w);
  EXPECT_TRUE(f.space == SpaceModel::cantor());
  EXPECT_EQ(f.norm.lo, w.norm.lo);
  EXPECT_EQ(f.norm.hi, w.norm.hi);
  Witness back = apply_transport(TransportTag::L, f);
  ASSERT_EQ(back.groups.size(), w.groups.size());
  for (std::size_t i = 0; i < w.groups.size(); ++i)
    EXPECT_EQ(measure(*back.groups[i].support), measure(*w.groups[i].support));
  EXPECT_TRUE(p_report(f).granted);
}

TEST(Transport, TagNames) {
  for (auto t : {TransportTag::F, TransportTag::L, TransportTag::G, TransportTag::GInverse, TransportTag::T,
                 TransportTag::TInverse})
    EXPECT_EQ(parse_transport_tag(to_string(t)), t);
}

TEST(Transport, RademacherNorms) {
  RademacherNorm one = rademacher_norm({{Rational(1)}}, Rational(1));
  ASSERT_TRUE(one.pmass_exact.has_value());
  EXPECT_EQ(*one.pmass_exact, 1);
  RademacherNorm unit = rademacher_norm({{q(3, 5), q(4, 5)}}, Rational(2));
  EXPECT_EQ(*unit.pmass_exact, 1);
  EXPECT_TRUE(unit.norm.contains(Rational(1)));
  // E|3 r1 + 4 r2| = (7 + 1 + 1 + 7) / 4
  RademacherNorm l1 = rademacher_norm({{Rational(3), Rational(4)}}, Rational(1));
  EXPECT_EQ(*l1.pmass_exact, 4);
  RademacherNorm half = rademacher_norm({{Rational(3), Rational(4)}}, q(3, 2));
  EXPECT_FALSE(half.pmass_exact.has_value());
  EXPECT_TRUE(half.pmass.contains(Rational(7)) == false);
  EXPECT_EQ(code_of([] { rademacher_norm({std::vector<Rational>(21, Rational(1))}, Rational(2)); }),
            ErrorCode::SupportTooLarge);
}

TEST(Transport, RademacherValues) {
  RademacherVector a{{Rational(3), Rational(4)}};
  // r1 = +1 on [0,1/2), r2 = +1 on [0,1/4) and [1/2,3/4)
  EXPECT_EQ(a.value_on(2, Integer(0)), 7);
  EXPECT_EQ(a.value_on(2, Integer(1)), -1);
  EXPECT_EQ(a.value_on(2, Integer(2)), 1);
  EXPECT_EQ(a.value_on(2, Integer(3)), -7);
}

TEST(Transport, Nonconstancy) {
  RademacherVector a{{Rational(1), Rational(1)}};
  EXPECT_TRUE(nonconstancy_check(a, DyadicInterval{1, 0}));
  EXPECT_FALSE(nonconstancy_check(a, DyadicInterval{2, 1}));
  BlockCombination v{{Rational(1), Rational(-2)}};
  for (std::uint64_t level = 0; level < 50; ++level) {
    auto n = v.nonzero_beyond(level);
    ASSERT_TRUE(n.has_value());
    EXPECT_GT(*n, level);
  }
  EXPECT_TRUE(nonconstancy_check(v, DyadicInterval{7, 3}));
  EXPECT_FALSE(BlockCombination{{Rational(0)}}.nonzero_beyond(3).has_value());
}

TEST(Transport, TensorWithSingleRademacher) {
  Witness f = small_hA(SpaceModel::unit_interval());
  Witness t = tensor_embed(f, {{Rational(1)}});
  EXPECT_TRUE(t.norm.intersects(f.norm));
  FubiniCheck fc = fubini_check(f, t);
  EXPECT_TRUE(fc.ok) << fc.message;
  EXPECT_GT(fc.terms_checked, 0u);
}

TEST(Transport, TensorFubini) {
  Witness f = small_hA(SpaceModel::cantor());
  Witness t = tensor_embed(f, {{Rational(3), Rational(-4)}});
  FubiniCheck fc = fubini_check(f, t);
  EXPECT_TRUE(fc.ok) << fc.message;
  EXPECT_EQ(code_of([&] { tensor_embed(f, {{Rational(0), Rational(0)}}); }), ErrorCode::ZeroVector);
}

TEST(Transport, RebuildAnyFollowsChain) {
  Witness w = small_hA(SpaceModel::unit_interval());
  Witness f = apply_transport(TransportTag::F, w);
  Witness r = rebuild_any(f.params);
  EXPECT_TRUE(r.space == f.space);
  ASSERT_EQ(r.groups.size(), f.groups.size());
  for (std::size_t i = 0; i < f.groups.size(); ++i)
    EXPECT_EQ(r.groups[i].support->to_string(), f.groups[i].support->to_string());
}
