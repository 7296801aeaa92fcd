#include "pforge/acceptance.hpp"

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "pforge/cli.hpp"
#include "pforge/constructions.hpp"
#include "pforge/error.hpp"
#include "pforge/transport.hpp"

namespace pforge {

namespace {

using Clock = std::chrono::steady_clock;

Target lq(const Rational& q) { return Target{Target::Kind::Lq, q}; }
Target linf() { return Target{Target::Kind::Linf, Rational(0)}; }

const std::vector<Rational>& criterion1_qs() {
  static const std::vector<Rational> qs{Rational(5, 4), Rational(3, 2), Rational(2), Rational(3)};
  return qs;
}

// Collects failures; a criterion passes when none were recorded.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 6) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary(const std::string& extra) const {
    std::ostringstream os;
    os << (count_ - failed_) << "/" << count_ << " checks";
    if (!extra.empty()) os << "; " << extra;
    for (const auto& f : failures_) os << "; FAILED " << f;
    return os.str();
  }

 private:
  std::size_t count_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

Rational random_rational(std::mt19937_64& rng, long max_num, long max_den, bool nonzero) {
  std::uniform_int_distribution<long> num(-max_num, max_num);
  std::uniform_int_distribution<long> den(1, max_den);
  long n = num(rng);
  while (nonzero && n == 0) n = num(rng);
  Rational r(n, den(rng));
  r.canonicalize();
  return r;
}

bool all_of_type(const Report& r, CertType t) {
  for (const auto& v : r.verdicts)
    if (v.verdict.cert.type != t) return false;
  return !r.verdicts.empty();
}

Integer uniform_bound(std::uint64_t depth) {
  Integer t;
  mpz_ui_pow_ui(t.get_mpz_t(), 2, depth + 1);
  return t - 2;
}

// Floating-point oracle, independent of the certificate logic: partial sums
// of the actual terms up to the predicted index exceed the threshold. Indices
// too large to sum over use sum_{m<=N} C m^-a >= C ln(N+1) for a <= 1.
bool float_divergence_oracle(const MassFamily& f, const Verdict& v, const Rational& threshold, std::string& why) {
  DivergenceIndex N = divergence_witness_index(f, v, threshold);
  const long double ln2 = std::log(2.0L);
  long double target = static_cast<long double>(to_double(threshold));
  if (f.kind != StrandKind::GeometricP) {
    why = "not a geometric family";
    return false;
  }
  long double logC = static_cast<long double>(f.C.log2()) * ln2;
  long double a = static_cast<long double>(to_double(f.a));
  long double logRho = static_cast<long double>(f.rho.log2()) * ln2;
  const unsigned long kSumLimit = 50000000;
  if (N.dyadic && (N.log2 > 25)) {
    if (f.filter || a > 1 || logRho != 0) {
      why = "integral bound needs an unfiltered harmonic family";
      return false;
    }
    long double lower = std::exp(logC) * static_cast<long double>(N.log2.get_d()) * ln2 * (1 - 1e-12L);
    if (!(lower > target)) {
      why = "integral bound " + std::to_string(static_cast<double>(lower)) + " at 2^" + N.log2.get_str();
      return false;
    }
    return true;
  }
  if (!N.index.fits_ulong_p() || N.index.get_ui() > kSumLimit) {
    why = "predicted index " + N.index.get_str() + " too large for summation";
    return false;
  }
  long double sum = 0;
  for (unsigned long m = 1; m <= N.index.get_ui(); ++m) {
    if (f.filter && !f.filter->contains(m)) continue;
    sum += std::exp(logC - a * std::log(static_cast<long double>(m)) + m * logRho);
  }
  if (!(sum * (1 - 1e-12L) > target)) {
    why = "partial sum " + std::to_string(static_cast<double>(sum)) + " at index " + N.index.get_str();
    return false;
  }
  return true;
}

// Criterion-1 certificates for one hA-style witness at depth 30.
void criterion1_checks(AcceptanceContext& ctx, Checks& ck, const Witness& w, const std::string& tag, bool oracle,
                       std::set<std::string>* oracle_done) {
  Report pr = p_report(w);
  log_report(ctx, tag + " p", w, pr, lq(w.p));
  ck.expect(pr.granted && all_of_type(pr, CertType::RatioTest), tag + " p-verdicts converge by RatioTest");
  for (const auto& q : criterion1_qs()) {
    Report r = nowhere_report(w, lq(q), 30);
    log_report(ctx, tag + " q=" + q.get_str(), w, r, lq(q));
    bool explicit_ok = r.verdicts.size() == 31;
    for (std::size_t i = 0; i < r.verdicts.size(); ++i)
      explicit_ok = explicit_ok && r.verdicts[i].n == i && !r.verdicts[i].verdict.converges;
    ck.expect(r.granted && r.uniform && explicit_ok && Integer(static_cast<unsigned long>(r.uniform_through)) == uniform_bound(30),
              tag + " NowhereLq(" + q.get_str() + ") at depth 30");
    if (!oracle) continue;
    std::map<std::string, const BaseVerdict*> by_family;
    for (const auto& bv : r.verdicts) by_family.emplace(bv.family, &bv);
    for (const auto& [fam, bv] : by_family) {
      if (oracle_done && !oracle_done->insert(fam).second) continue;
      Strand s;
      for (const auto& g : w.groups)
        if (g.id == bv->group) s = g.strand(bv->strand);
      MassFamily f = q_mass_family(s, q);
      for (const auto& threshold : {Rational(10), Rational(100)}) {
        std::string why;
        bool ok = ctx.divergence_oracle ? ctx.divergence_oracle(f, bv->verdict, threshold, why)
                                        : float_divergence_oracle(f, bv->verdict, threshold, why);
        ck.expect(ok, tag + " oracle " + fam + " at " + threshold.get_str() + ": " + why);
      }
    }
  }
}

const Witness& criterion1_witness() {
  static const Witness w = build_hA(SpaceModel::unit_interval(), Rational(1));
  return w;
}

CriterionResult c1(AcceptanceContext& ctx) {
  Checks ck;
  const Witness& w = criterion1_witness();
  ck.expect(w.horizon == 30 && w.norm.contains(Rational(1)), "horizon 30 and norm enclosure contains 1");
  std::set<std::string> done;
  criterion1_checks(ctx, ck, w, "hA", true, &done);
  return {1, "hA witness: InLp(1), NowhereLq for q in {5/4,3/2,2,3} at depth 30", ck.ok(),
          ck.summary(std::to_string(done.size()) + " divergent families cross-checked at thresholds 10 and 100"), 0};
}

CriterionResult c2(AcceptanceContext& ctx) {
  Checks ck;
  BuildOptions opts;
  opts.horizon = 20;
  Witness g = build_gB(SpaceModel::half_line(), Rational(2), std::nullopt, opts);
  Report pr = p_report(g);
  log_report(ctx, "gB p", g, pr, lq(g.p));
  ck.expect(pr.granted, "half-line p-verdicts converge");
  ck.expect(g.norm_certified && g.norm.contains(Rational(1)), "half-line norm enclosure contains 1");
  for (const auto& q : {Rational(1, 2), Rational(1), Rational(3, 2)}) {
    Report r = global_divergence_report(g, q);
    log_report(ctx, "gB q", g, r, lq(q));
    ck.expect(r.granted && !r.verdicts.empty() && !r.verdicts[0].verdict.converges,
              "half-line q=" + q.get_str() + " diverges");
  }
  Witness c = build_gB(SpaceModel::counting(), Rational(2), std::nullopt, opts);
  Report cp = p_report(c);
  log_report(ctx, "counting p", c, cp, lq(c.p));
  ck.expect(cp.granted && c.norm_certified && c.norm.contains(Rational(1)) && c.norm.width() < pow2(-16),
            "counting sequence in l2 with certified norm");
  for (const auto& q : {Rational(1, 2), Rational(1)}) {
    Report r = global_divergence_report(c, q);
    log_report(ctx, "counting q", c, r, lq(q));
    ck.expect(r.granted, "counting q=" + q.get_str() + " diverges");
  }
  return {2, "gB witness (half-line, counting): in L2, outside Lq for q < 2", ck.ok(), ck.summary(""), 0};
}

CriterionResult c3(AcceptanceContext& ctx) {
  Checks ck;
  std::mt19937_64 rng(ctx.seed + 3);
  auto fam = build_basic_family(SpaceModel::unit_interval(), Rational(1), 8, BasicMode::Sp);
  bool disjoint_ok = true;
  for (std::size_t i = 0; i < fam.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      for (const auto& a : fam[i].groups)
        for (const auto& b : fam[j].groups) disjoint_ok = disjoint_ok && disjoint(*a.support, *b.support);
  ck.expect(fam.size() == 8 && disjoint_ok, "8 members with pairwise disjoint supports");
  Rational tol = pow2(-16);
  for (int t = 0; t < 20; ++t) {
    std::vector<Rational> c(8);
    for (auto& x : c) x = random_rational(rng, 9, 9, false);
    if (std::all_of(c.begin(), c.end(), [](const Rational& x) { return x == 0; })) c[0] = 1;
    Rational target = 0;
    for (const auto& x : c) target += abs(x);
    IsometryResult iso = isometry_check(fam, c, Rational(1));
    Enclosure window{target * (1 - tol), target * (1 + tol), Rational(0)};
    ck.expect(iso.pmass.intersects(window), "isometry vector " + std::to_string(t));
  }
  for (std::size_t m = 0; m < fam.size(); ++m)
    criterion1_checks(ctx, ck, fam[m], "member " + std::to_string(m), false, nullptr);
  auto prime = build_basic_family(SpaceModel::half_line(), Rational(1), 4, BasicMode::SpPrime);
  for (std::size_t m = 0; m < prime.size(); ++m) {
    Report hi = nowhere_report(prime[m], lq(Rational(2)), 10);
    log_report(ctx, "sp-prime hi", prime[m], hi, lq(Rational(2)));
    Report lo = global_divergence_report(prime[m], Rational(1, 2));
    log_report(ctx, "sp-prime lo", prime[m], lo, lq(Rational(1, 2)));
    ck.expect(hi.granted && lo.granted, "sp-prime member " + std::to_string(m) + " diverges above and below p");
  }
  return {3, "basic families: disjointness, l1 isometry, SpPrime two-sided divergence", ck.ok(), ck.summary(""), 0};
}

CriterionResult c4(AcceptanceContext& ctx) {
  Checks ck;
  std::mt19937_64 rng(ctx.seed + 4);
  std::vector<DensePair> pairs{{dyadic(1, 0), 4, AlmostDisjointIndex::parse("0|1")},
                               {dyadic(1, 1), 2, AlmostDisjointIndex::parse("001|0")},
                               {dyadic(2, 1), 3, AlmostDisjointIndex::parse("000|1")},
                               {dyadic(3, 5), 5, AlmostDisjointIndex::parse("1|0")},
                               {dyadic(2, 3), 7, AlmostDisjointIndex::parse("01|0")}};
  auto gens = build_dense_generators(SpaceModel::unit_interval(), Rational(1), pairs);
  for (std::size_t i = 0; i < gens.size(); ++i) {
    Enclosure d = dense_deviation_norm(gens[i]);
    ck.expect(d.width() <= pow2(-18) && d.contains(Rational(1, static_cast<long>(pairs[i].n))),
              "deviation of generator " + std::to_string(i) + " encloses 1/n within 2^-18");
    Report pr = p_report(gens[i]);
    log_report(ctx, "dense p", gens[i], pr, lq(gens[i].p));
  }
  for (int t = 0; t < 10; ++t) {
    std::vector<std::size_t> idx;
    if (t == 0) {
      idx = {1, 2, 0};
    } else {
      idx = {0, 1, 2, 3, 4};
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(3 + rng() % 3);
    }
    std::vector<std::pair<Rational, const Witness*>> combo;
    std::set<std::string> seeds;
    for (std::size_t i : idx) {
      combo.emplace_back(random_rational(rng, 9, 9, true), &gens[i]);
      seeds.insert(pairs[i].seed.seed());
    }
    DenseCombinationReport rep = dense_combination_certify(combo);
    for (std::size_t k = 0; k < rep.per_exponent.size(); ++k) {
      const Rational& p = gens[0].p;
      std::vector<Rational> qs{p * Rational(5, 4), p * Rational(3, 2), p * 2, p * 3};
      log_report(ctx, "dense combination", rep.tail, rep.per_exponent[k], lq(qs.at(k)));
    }
    bool shared_ok = t != 0 || rep.cut_block >= 3;
    ck.expect(rep.report.granted && seeds.size() >= 3 && shared_ok,
              "combination " + std::to_string(t) + " granted InSp (cut block " + std::to_string(rep.cut_block) + ")");
  }
  return {4, "dense generators: deviation 1/n, InSp for random combinations", ck.ok(), ck.summary(""), 0};
}

// Least j with 2 sum_{i>=2} |beta_i| theta_i^j < |beta_1| theta_1^j, from the
// polynomial directly.
std::uint64_t scan_j0(const std::vector<std::pair<Rational, Integer>>& terms) {
  for (std::uint64_t j = 1; j < 10000; ++j) {
    Rational rest = 0;
    for (std::size_t i = 1; i < terms.size(); ++i) {
      Integer t;
      mpz_pow_ui(t.get_mpz_t(), terms[i].second.get_mpz_t(), j);
      rest += abs(terms[i].first) * Rational(t);
    }
    Integer lead;
    mpz_pow_ui(lead.get_mpz_t(), terms[0].second.get_mpz_t(), j);
    if (2 * rest < abs(terms[0].first) * Rational(lead)) return j;
  }
  return 0;
}

std::string random_polynomial(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coeff(-5, 5);
  std::size_t terms = 1 + rng() % 3;
  std::ostringstream os;
  for (std::size_t t = 0; t < terms; ++t) {
    int c = 0;
    while (c == 0) c = coeff(rng);
    int degree = 1 + static_cast<int>(rng() % 3);
    int e[3] = {0, 0, 0};
    for (int d = 0; d < degree; ++d) ++e[rng() % 3];
    os << (c < 0 ? " - " : " + ") << std::abs(c);
    for (int v = 0; v < 3; ++v)
      if (e[v]) os << "*x" << v << "^" << e[v];
  }
  return os.str();
}

CriterionResult c5(AcceptanceContext& ctx) {
  Checks ck;
  std::mt19937_64 rng(ctx.seed + 5);
  std::vector<Integer> thetas{2, 3, 5};
  PolynomialExpr zero = PolynomialExpr::parse("x0 - x0", 3);
  ck.expect(freeness_check(thetas, zero).zero, "zero polynomial detected");
  int made = 0;
  while (made < 10) {
    PolynomialExpr poly = PolynomialExpr::parse(random_polynomial(rng), 3);
    if (poly.monomials.empty()) continue;
    ++made;
    FreenessResult fr = freeness_check(thetas, poly);
    // Exponential sum built here from the monomials.
    std::map<Integer, Rational> merged;
    for (const auto& m : poly.monomials) {
      Integer th = 1;
      for (std::size_t v = 0; v < 3; ++v)
        for (unsigned k = 0; k < m.exponents[v]; ++k) th *= thetas[v];
      merged[th] += m.coeff;
    }
    std::vector<std::pair<Rational, Integer>> terms;
    for (auto it = merged.rbegin(); it != merged.rend(); ++it)
      if (it->second != 0) terms.emplace_back(it->second, it->first);
    std::uint64_t j0 = scan_j0(terms);
    bool dominance = true;
    for (std::uint64_t j = j0; j < j0 + 50; ++j) {
      Rational v = 0;
      for (const auto& [b, th] : terms) {
        Integer t;
        mpz_pow_ui(t.get_mpz_t(), th.get_mpz_t(), j);
        v += b * Rational(t);
      }
      Integer lead;
      mpz_pow_ui(lead.get_mpz_t(), terms[0].second.get_mpz_t(), j);
      dominance = dominance && 2 * abs(v) > abs(terms[0].first) * Rational(lead);
    }
    std::string name = poly.to_string();
    ck.expect(!fr.zero && fr.j0 == j0 && dominance, name + ": nonzero with j0 = " + std::to_string(j0));
    for (const auto& p : {Rational(1), Rational(2), Rational(7)}) {
      Witness w = algebra_generator_eval(thetas, poly, p);
      Report pr = p_report(w);
      log_report(ctx, "algebra p", w, pr, lq(p));
      ck.expect(pr.granted && all_of_type(pr, CertType::FactorialRatio), name + " converges at p=" + p.get_str());
      Report r = nowhere_report(w, linf(), 10);
      log_report(ctx, "algebra linf", w, r, linf());
      bool j0_ok = all_of_type(r, CertType::UnboundedValues);
      for (const auto& bv : r.verdicts) j0_ok = j0_ok && bv.verdict.cert.j0 == j0;
      ck.expect(r.granted && j0_ok, name + " NowhereLinf at depth 10, p=" + p.get_str());
    }
  }
  return {5, "algebra generators {2,3,5}: FactorialRatio at p in {1,2,7}, NowhereLinf, freeness", ck.ok(),
          ck.summary(""), 0};
}

std::string certificates(const Report& r) {
  std::string s;
  for (const auto& v : r.verdicts) s += v.group + "/" + std::to_string(v.strand) + v.verdict.to_json().dump() + "\n";
  return s;
}

std::string descriptors(const Witness& w) {
  std::string s;
  for (const auto& g : w.groups) s += g.support->to_string() + "|" + g.strand(1).term_set(2)->to_string() + "\n";
  return s;
}

CriterionResult c6(AcceptanceContext& ctx) {
  Checks ck;
  // Exhaustive leaves to depth 12.
  bool binary_ok = true;
  bool interleave_ok = true;
  std::size_t leaves = 0;
  for (int len = 0; len <= 12; ++len) {
    for (unsigned long k = 0; k < (1ul << len); ++k) {
      std::string stem = stem_of(len, Integer(k));
      SetExprPtr cyl = cylinder(stem);
      SetExprPtr iv = binary_image(cyl, BinaryDirection::ToInterval);
      SetExprPtr dy = dyadic(len, Integer(k));
      SetExprPtr cy = binary_image(dy, BinaryDirection::ToCantor);
      binary_ok = binary_ok && measure(*iv) == measure(*cyl) && measure(*cy) == measure(*dy) &&
                  binary_image(iv, BinaryDirection::ToCantor)->to_string() == cyl->to_string() &&
                  binary_image(cy, BinaryDirection::ToInterval)->to_string() == dy->to_string();
      SetExprPtr rect = interleave_image(cyl, InterleaveDirection::Deinterleave);
      interleave_ok = interleave_ok && measure(*rect) == measure(*cyl) &&
                      interleave_image(rect, InterleaveDirection::Interleave)->to_string() == cyl->to_string();
      ++leaves;
    }
  }
  for (int lx = 0; lx <= 6; ++lx)
    for (int ly = 0; ly <= 6; ++ly)
      for (unsigned long x = 0; x < (1ul << lx); ++x)
        for (unsigned long y = 0; y < (1ul << ly); ++y) {
          SetExprPtr rect = rectangle(cylinder(stem_of(lx, Integer(x))), cylinder(stem_of(ly, Integer(y))));
          SetExprPtr img = interleave_image(rect, InterleaveDirection::Interleave);
          interleave_ok = interleave_ok && measure(*img) == pow2(-(lx + ly));
          if (lx == ly || lx == ly + 1)
            interleave_ok = interleave_ok &&
                            interleave_image(img, InterleaveDirection::Deinterleave)->to_string() == rect->to_string();
          ++leaves;
        }
  ck.expect(binary_ok, "binary transport preserves measure and roundtrips to depth 12");
  ck.expect(interleave_ok, "interleave transport preserves measure and roundtrips to depth 12");

  const Witness& w = criterion1_witness();
  Witness a = apply_transport(TransportTag::F, w);
  Witness b = apply_transport(TransportTag::GInverse, a);
  Witness c = apply_transport(TransportTag::G, b);
  for (const auto& q : criterion1_qs()) {
    Report r0 = nowhere_report(w, lq(q), 30);
    Report r1 = nowhere_report(a, lq(q), 30);
    Report r3 = nowhere_report(c, lq(q), 30);
    log_report(ctx, "chain F", a, r1, lq(q));
    log_report(ctx, "chain G", c, r3, lq(q));
    ck.expect(r3.granted && certificates(r0) == certificates(r1) && certificates(r0) == certificates(r3),
              "verbatim certificates along F, G-inverse, G at q=" + q.get_str());
  }
  Report mid = nowhere_report(b, lq(Rational(2)), 10);
  log_report(ctx, "chain product", b, mid, lq(Rational(2)));
  ck.expect(mid.granted, "product picture grants NowhereLq(2) at depth 10");
  Report p0 = p_report(w);
  Report pb = p_report(b);
  log_report(ctx, "chain product p", b, pb, lq(b.p));
  ck.expect(certificates(p0) == certificates(pb), "p-certificates carried to the product verbatim");
  ck.expect(b.norm.lo == w.norm.lo && b.norm.hi == w.norm.hi, "norm enclosure carried over");
  Witness back = apply_transport(TransportTag::L, c);
  ck.expect(descriptors(back) == descriptors(w), "descriptor roundtrip L o G o G-inverse o F = identity");
  return {6, "transport: exact measure preservation, roundtrips, verbatim certificates", ck.ok(),
          ck.summary(std::to_string(leaves) + " leaves"), 0};
}

CriterionResult c7(AcceptanceContext& ctx) {
  Checks ck;
  std::mt19937_64 rng(ctx.seed + 7);
  for (int t = 0; t < 50; ++t) {
    RademacherVector a;
    std::size_t K = 1 + rng() % 12;
    Rational sq = 0;
    for (std::size_t i = 0; i < K; ++i) {
      a.a.push_back(random_rational(rng, 12, 12, i + 1 == K));
      sq += a.a.back() * a.a.back();
    }
    RademacherNorm n = rademacher_norm(a, Rational(2));
    std::string shown;
    for (const auto& x : a.a) shown += (shown.empty() ? "" : ",") + x.get_str();
    ck.expect(n.pmass_exact && *n.pmass_exact == sq, "p=2 identity for (" + shown + "): got " +
                                                          (n.pmass_exact ? n.pmass_exact->get_str() : "no exact value") +
                                                          ", expected " + sq.get_str());
  }
  // Direct enumeration of the four sign patterns of 3 r_1 + 4 r_2.
  Rational mean = 0;
  for (int e1 : {-1, 1})
    for (int e2 : {-1, 1}) mean += abs(Rational(3 * e1 + 4 * e2)) / 4;
  RademacherNorm n34 = rademacher_norm({{Rational(3), Rational(4)}}, Rational(1));
  ck.expect(mean == 4 && n34.pmass_exact && *n34.pmass_exact == mean && n34.norm_exact &&
                *n34.norm_exact == ExactPosReal(4),
            "||3 r1 + 4 r2||_1 = 4");
  ck.expect(nonconstancy_check(RademacherVector{{0, 0, 0, 0, Rational(1)}}, DyadicInterval{3, 0}) &&
                !nonconstancy_check(RademacherVector{{Rational(1), Rational(1)}}, DyadicInterval{2, 1}) &&
                nonconstancy_check(BlockCombination{{0, Rational(2)}}, DyadicInterval{20, 0}),
            "nonconstancy on dyadic intervals");
  const Witness& w = criterion1_witness();
  Witness tz = tensor_embed(w, {{Rational(3, 5), Rational(4, 5)}});
  FubiniCheck fb = fubini_check(w, tz);
  ck.expect(fb.ok, "truncated Fubini identity: " + fb.message);
  RademacherNorm rn = rademacher_norm({{Rational(3, 5), Rational(4, 5)}}, Rational(1));
  ck.expect(tz.norm.intersects(Enclosure{w.norm.lo * rn.norm.lo, w.norm.hi * rn.norm.hi, Rational(0)}),
            "tensor norm encloses ||f|| * ||sum a r||");
  Report r = nowhere_report(tz, lq(Rational(2)), 10);
  log_report(ctx, "tensor q=2", tz, r, lq(Rational(2)));
  Report pr = p_report(tz);
  log_report(ctx, "tensor p", tz, pr, lq(tz.p));
  ck.expect(r.granted && r.verdicts.size() == 11, "tensor NowhereLq(2) at depth 10 on the product base");
  ck.expect(pr.granted, "tensor p-verdicts converge");
  return {7, "Rademacher norms and tensor embedding", ck.ok(), ck.summary(fb.message), 0};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CriterionResult c8(AcceptanceContext& ctx) {
  Checks ck;
  if (ctx.log.empty())
    for (int id = 1; id <= 7; ++id) run_criterion(id, ctx);
  // Replay each distinct certificate once.
  std::set<std::string> seen;
  std::size_t replayed = 0;
  for (const auto& e : ctx.log) {
    std::string key = e.family.describe() + "|" + e.verdict.to_json().dump();
    if (!seen.insert(key).second) continue;
    Replay rp = replay(e.family, e.verdict);
    ck.expect(rp.ok, e.origin + ": " + rp.message);
    ++replayed;
  }
  // Identical CLI invocations, twice.
  auto dir = std::filesystem::temp_directory_path() / ("pforge-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::vector<std::string> outputs[2];
  for (int run = 0; run < 2; ++run) {
    auto f = [&](const std::string& name) { return (dir / (name + std::to_string(run))).string(); };
    std::ostringstream out, err;
    std::vector<std::vector<std::string>> cmds{
        {"build", "--space", "unit-interval", "--p", "1", "--kind", "sp-basic", "--count", "2", "--out", f("w")},
        {"certify", f("w"), "--claim", "nowhere-lq", "--q", "2", "--depth", "12", "--out", f("c")},
        {"export", f("w"), "--depth", "8", "--format", "csv", "--out", f("e")},
        {"transport", f("w"), "--map", "F", "--out", f("t")}};
    for (const auto& cmd : cmds) ck.expect(run_command(cmd, out, err) == kExitOk, cmd[0] + " exits 0: " + err.str());
    for (const char* n : {"w", "c", "e", "t"}) outputs[run].push_back(slurp(f(n)));
  }
  ck.expect(outputs[0] == outputs[1], "byte-identical CLI outputs");
  std::filesystem::remove_all(dir);
  return {8, "soundness replay and CLI determinism", ck.ok(),
          ck.summary(std::to_string(replayed) + " distinct certificates replayed of " + std::to_string(ctx.log.size())),
          0};
}

}  // namespace

void log_report(AcceptanceContext& ctx, const std::string& origin, const Witness& w, const Report& r,
                const Target& target) {
  for (const auto& bv : r.verdicts) {
    for (const auto& g : w.groups) {
      if (g.id != bv.group) continue;
      Strand s = g.strand(bv.strand);
      Rational q = target.kind == Target::Kind::Linf ? Rational(1) : target.q;
      ctx.log.push_back({origin, q_mass_family(s, q), bv.verdict});
      break;
    }
  }
}

CriterionResult run_criterion(int id, AcceptanceContext& ctx) {
  auto t0 = Clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = c1(ctx); break;
      case 2: r = c2(ctx); break;
      case 3: r = c3(ctx); break;
      case 4: r = c4(ctx); break;
      case 5: r = c5(ctx); break;
      case 6: r = c6(ctx); break;
      case 7: r = c7(ctx); break;
      case 8: r = c8(ctx); break;
      default: throw Error(ErrorCode::InvalidArgument, "no criterion " + std::to_string(id));
    }
  } catch (const std::exception& e) {
    r = {id, "criterion " + std::to_string(id), false, std::string("exception: ") + e.what(), 0};
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(AcceptanceContext& ctx) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kCriteria; ++id) out.push_back(run_criterion(id, ctx));
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.title << "  ("
     << std::fixed << std::setprecision(2) << r.seconds << " s)  " << r.detail;
  return os.str();
}

}  // namespace pforge
