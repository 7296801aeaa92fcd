#include "pforge/certify.hpp"

#include <chrono>
#include <cmath>

#include "pforge/error.hpp"
#include "pforge/ledger.hpp"

namespace pforge {

using nlohmann::ordered_json;

std::string to_string(CertType t) {
  switch (t) {
    case CertType::RatioTest: return "RatioTest";
    case CertType::GeometricGrowth: return "GeometricGrowth";
    case CertType::PSeries: return "PSeries";
    case CertType::HarmonicComparison: return "HarmonicComparison";
    case CertType::FactorialRatio: return "FactorialRatio";
    case CertType::UnboundedValues: return "UnboundedValues";
  }
  return "?";
}

nlohmann::json Certificate::to_json() const {
  ordered_json j;
  j["type"] = to_string(type);
  switch (type) {
    case CertType::RatioTest:
      j["rho"] = rho.to_string();
      j["from_index"] = from_index;
      break;
    case CertType::GeometricGrowth:
      j["rho"] = rho.to_string();
      j["from_index"] = from_index;
      j["crossover"] = crossover;
      break;
    case CertType::PSeries:
    case CertType::HarmonicComparison:
      j["exponent"] = exponent.get_str();
      j["constant"] = constant.to_string();
      if (!filter_seed.empty()) j["filter_seed"] = filter_seed;
      break;
    case CertType::FactorialRatio:
      j["growth"] = growth.to_string();
      j["value_bound"] = value_bound.to_string();
      j["from_index"] = from_index;
      break;
    case CertType::UnboundedValues:
      j["beta1"] = beta1.get_str();
      j["theta1"] = theta1.get_str();
      j["j0"] = j0;
      break;
  }
  return j;
}

nlohmann::json Verdict::to_json() const {
  ordered_json j;
  j["verdict"] = name();
  j["certificate"] = cert.to_json();
  if (bound) j["bound"] = {{"lo", bound->lo.get_str()}, {"hi", bound->hi.get_str()}};
  return j;
}

namespace {

const ExactPosReal kOne;

ExactPosReal index_power(std::uint64_t m, const Rational& e) {
  return ExactPosReal::power(Rational(static_cast<unsigned long>(m)), e);
}

Rational index_rational(std::uint64_t m) { return Rational(static_cast<unsigned long>(m)); }

// Unfiltered closed-form GeometricP term.
ExactPosReal geometric_term(const MassFamily& f, std::uint64_t m) {
  return f.C * index_power(m, -f.a) * f.rho.pow(index_rational(m));
}

// Least m >= 1 with ((m+1)/m)^e <= target, e > 0, target > 1.
std::uint64_t ratio_index(const Rational& e, const ExactPosReal& target) {
  auto ok = [&](std::uint64_t m) {
    return ExactPosReal::power(Rational(static_cast<unsigned long>(m + 1), static_cast<unsigned long>(m)), e) <= target;
  };
  std::uint64_t hi = 1;
  while (!ok(hi)) {
    if (hi > (std::uint64_t{1} << 40)) throw Error(ErrorCode::UnclassifiableFamily, "ratio index out of range");
    hi *= 2;
  }
  std::uint64_t lo = hi / 2;
  if (lo == 0) return 1;
  while (hi - lo > 1) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

Rational abs_sum(const std::vector<std::pair<Rational, Integer>>& values) {
  Rational s = 0;
  for (const auto& [b, t] : values) s += abs(b);
  return s;
}

Integer max_theta(const std::vector<std::pair<Rational, Integer>>& values) {
  Integer m = 0;
  for (const auto& [b, t] : values) m = std::max(m, t);
  return m;
}

Verdict geometric_verdict(const MassFamily& f, bool with_bound, const Rational& goal) {
  Verdict v;
  Certificate& c = v.cert;
  Ordering o = compare(f.rho, kOne);
  if (o == Ordering::Less) {
    c.type = CertType::RatioTest;
    if (f.a >= 0) {
      c.rho = f.rho;
      c.from_index = 1;
    } else {
      c.rho = f.rho.pow(Rational(1, 2));
      c.from_index = ratio_index(-f.a, c.rho / f.rho);
    }
    v.converges = true;
  } else if (o == Ordering::Greater) {
    c.type = CertType::GeometricGrowth;
    c.rho = f.rho;
    ExactPosReal half = f.rho.pow(Rational(1, 2));
    c.from_index = f.a > 0 ? ratio_index(f.a, half) : 1;
    // Terms grow by at least sqrt(rho) from from_index on; find where they pass 1.
    std::uint64_t lo = c.from_index;
    if (geometric_term(f, lo) >= kOne) {
      c.crossover = lo;
    } else {
      std::uint64_t step = 1;
      while (geometric_term(f, lo + step) < kOne) {
        lo += step;
        step *= 2;
        if (step > (std::uint64_t{1} << 40)) throw Error(ErrorCode::UnclassifiableFamily, "crossover out of range");
      }
      std::uint64_t hi = lo + step;
      while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        (geometric_term(f, mid) >= kOne ? hi : lo) = mid;
      }
      c.crossover = hi;
    }
    v.converges = false;
  } else {
    c.exponent = f.a;
    c.constant = f.C;
    if (f.filter) c.filter_seed = f.filter->seed();
    if (f.a > 1) {
      c.type = CertType::PSeries;
      v.converges = true;
    } else {
      c.type = CertType::HarmonicComparison;
      v.converges = false;
    }
  }
  if (v.converges && with_bound) v.bound = mass_enclosure(f, goal);
  return v;
}

Verdict factorial_verdict(const MassFamily& f, bool with_bound, const Rational& goal) {
  Verdict v;
  v.converges = true;
  Certificate& c = v.cert;
  c.type = CertType::FactorialRatio;
  if (f.values.empty()) {
    c.growth = kOne;
    c.value_bound = kOne;
    c.from_index = 1;
    if (with_bound) v.bound = Enclosure::exact(Rational(0));
    return v;
  }
  c.growth = ExactPosReal::power(Rational(max_theta(f.values)), f.q);
  c.value_bound = f.C * ExactPosReal(f.K) * ExactPosReal::power(abs_sum(f.values), f.q);
  // growth / (j+1) <= 1/2  <=>  j >= 2 growth - 1
  Integer j = ceil_of(enclose(c.growth, 64).hi * 2 - 1);
  c.from_index = j < 1 ? 1 : j.get_ui();
  if (with_bound) v.bound = mass_enclosure(f, goal);
  return v;
}

}  // namespace

Verdict series_verdict(const MassFamily& f, bool with_bound, const Rational& goal) {
  if (f.q <= 0) throw Error(ErrorCode::UnclassifiableFamily, "exponent must be positive");
  if (f.kind == StrandKind::GeometricP) return geometric_verdict(f, with_bound, goal);
  if (f.filter) throw Error(ErrorCode::UnclassifiableFamily, "filtered factorial families are not emitted");
  for (const auto& [b, t] : f.values)
    if (t < 1) throw Error(ErrorCode::UnclassifiableFamily, "factorial family needs values theta >= 1");
  return factorial_verdict(f, with_bound, goal);
}

// ---------------------------------------------------------------------------
// Replay

namespace {

Replay fail(std::string msg) { return Replay{false, std::move(msg)}; }

// sum_{a <= t < b} 1/t >= 1, via floor(2^256 / t) lower bounds and an exact sum
// when those are inconclusive on a short block.
bool harmonic_block_reaches_one(std::uint64_t a, std::uint64_t b) {
  Integer unit;
  mpz_ui_pow_ui(unit.get_mpz_t(), 2, 256);
  Integer acc = 0;
  Integer q;
  for (std::uint64_t t = a; t < b; ++t) {
    mpz_fdiv_q_ui(q.get_mpz_t(), unit.get_mpz_t(), static_cast<unsigned long>(t));
    acc += q;
  }
  if (acc >= unit) return true;
  if (b - a > 5000) return false;
  Rational s = 0;
  for (std::uint64_t t = a; t < b; ++t) s += Rational(1, static_cast<unsigned long>(t));
  return s >= 1;
}

Replay replay_bound(const MassFamily& f, const Verdict& v) {
  if (!v.bound) return Replay{true, "converges"};
  Rational lower_sum = 0;
  for (std::uint64_t m = 1; m <= 200; ++m)
    if (auto t = f.term(m)) lower_sum += enclose(*t, 40).lo;
  Enclosure b = *v.bound;
  if (auto factor = f.factor()) {
    if (lower_sum * factor->lo > b.hi) return fail("partial sums exceed the bound");
  } else if (lower_sum > b.hi) {
    return fail("partial sums exceed the bound");
  }
  return Replay{true, "converges; partial sums below bound"};
}

}  // namespace

Replay replay(const MassFamily& f, const Verdict& v) {
  const Certificate& c = v.cert;
  switch (c.type) {
    case CertType::RatioTest: {
      if (f.kind != StrandKind::GeometricP || !v.converges) return fail("RatioTest needs a convergent geometric family");
      if (!(c.rho < kOne)) return fail("ratio bound is not below 1");
      // t_{m+1}/t_m = (m/(m+1))^a * rho is monotone in m; check the first index.
      std::uint64_t m = c.from_index;
      ExactPosReal r = ExactPosReal::power(Rational(static_cast<unsigned long>(m), static_cast<unsigned long>(m + 1)), f.a) * f.rho;
      if (!(r <= c.rho)) return fail("ratio inequality fails at from_index");
      for (std::uint64_t k = m; k < m + 20; ++k)
        if (!(geometric_term(f, k + 1) <= c.rho * geometric_term(f, k))) return fail("term ratio exceeds bound");
      return replay_bound(f, v);
    }
    case CertType::GeometricGrowth: {
      if (f.kind != StrandKind::GeometricP || v.converges) return fail("GeometricGrowth needs a divergent geometric family");
      if (!(c.rho > kOne) || !(c.rho == f.rho)) return fail("growth rate mismatch");
      ExactPosReal half = f.rho.pow(Rational(1, 2));
      std::uint64_t m = c.from_index;
      if (f.a > 0 &&
          !(ExactPosReal::power(Rational(static_cast<unsigned long>(m + 1), static_cast<unsigned long>(m)), f.a) <= half))
        return fail("growth inequality fails at from_index");
      if (c.crossover < c.from_index || geometric_term(f, c.crossover) < kOne)
        return fail("crossover term is below 1");
      return Replay{true, "terms >= 1 from the crossover on"};
    }
    case CertType::PSeries: {
      if (f.kind != StrandKind::GeometricP || !(f.rho == kOne)) return fail("PSeries needs rho = 1");
      if (c.exponent != f.a || c.exponent <= 1 || !(c.constant == f.C)) return fail("p-series parameters mismatch");
      return replay_bound(f, v);
    }
    case CertType::HarmonicComparison: {
      if (f.kind != StrandKind::GeometricP || !(f.rho == kOne)) return fail("harmonic comparison needs rho = 1");
      if (c.exponent != f.a || c.exponent > 1 || !(c.constant == f.C)) return fail("harmonic parameters mismatch");
      if (f.filter) {
        if (c.filter_seed != f.filter->seed()) return fail("filter seed mismatch");
        // Every selected block sums to at least 1: verify the first few exactly.
        auto cut = f.filter->cut();
        for (std::size_t i = 0, checked = 0; checked < 4 && i < 64; ++i) {
          std::uint64_t k = f.filter->derived(i);
          if (cut && k <= *cut) continue;
          // Block lengths grow like e^k.
          if (k > 11) break;
          ++checked;
          std::uint64_t a = AlmostDisjointIndex::block_start(k);
          std::uint64_t b = AlmostDisjointIndex::block_start(k + 1);
          if (!harmonic_block_reaches_one(a, b)) return fail("harmonic block sums below 1");
          for (std::uint64_t t : {a, b - 1})
            if (!f.filter->contains(t)) return fail("filter misses a selected block");
        }
      }
      return Replay{true, "terms dominate constant/m on the admitted indices"};
    }
    case CertType::FactorialRatio: {
      if (f.kind != StrandKind::FactorialDyadic || !v.converges) return fail("FactorialRatio needs a factorial family");
      if (f.values.empty()) return Replay{true, "zero family"};
      if (!(c.growth >= ExactPosReal::power(Rational(max_theta(f.values)), f.q))) return fail("growth too small");
      if (!(c.value_bound >= f.C * ExactPosReal(f.K) * ExactPosReal::power(abs_sum(f.values), f.q)))
        return fail("value bound too small");
      if (!(c.growth * ExactPosReal(Rational(2)) <= ExactPosReal(index_rational(c.from_index + 1))))
        return fail("growth/(j+1) exceeds 1/2 at from_index");
      Integer fact = 1;
      for (std::uint64_t j = 1; j <= 40; ++j) {
        fact *= static_cast<unsigned long>(j);
        auto t = f.term(j);
        if (!t) continue;
        ExactPosReal bound = c.value_bound * c.growth.pow(index_rational(j)) / ExactPosReal(Rational(fact));
        if (!(*t <= bound)) return fail("term exceeds value_bound * growth^j / j!");
      }
      return replay_bound(f, v);
    }
    case CertType::UnboundedValues: {
      if (f.kind != StrandKind::FactorialDyadic) return fail("UnboundedValues needs a factorial family");
      ExponentialSum es{f.values};
      if (es.is_zero()) return fail("zero values are bounded");
      if (c.beta1 != es.terms.front().first || c.theta1 != es.terms.front().second) return fail("leading term mismatch");
      for (std::uint64_t j = c.j0; j < c.j0 + 200; ++j) {
        Integer t;
        mpz_pow_ui(t.get_mpz_t(), c.theta1.get_mpz_t(), j);
        if (!(abs(es.value(j)) * 2 > abs(c.beta1) * Rational(t))) return fail("dominance fails past j0");
      }
      if (c.theta1 < 2) return fail("leading growth is not above 1");
      return Replay{true, "values dominate |beta1| theta1^j / 2 from j0 on"};
    }
  }
  return fail("unknown certificate");
}

DivergenceIndex divergence_witness_index(const MassFamily& f, const Verdict& v, const Rational& threshold) {
  if (v.converges) throw Error(ErrorCode::InvalidArgument, "verdict converges");
  const Certificate& c = v.cert;
  DivergenceIndex out;
  if (c.type == CertType::GeometricGrowth) {
    // Every admitted term from the crossover on is >= 1.
    Integer need = floor_of(threshold) + 1;
    if (!f.filter) {
      out.index = Integer(static_cast<unsigned long>(c.crossover)) + need - 1;
      return out;
    }
    Integer count = 0;
    for (std::uint64_t m = c.crossover;; ++m) {
      if (f.filter->contains(m) && ++count >= need) {
        out.index = Integer(static_cast<unsigned long>(m));
        return out;
      }
      if (m > (std::uint64_t{1} << 34)) throw Error(ErrorCode::InvalidArgument, "index out of range");
    }
  }
  if (c.type == CertType::HarmonicComparison) {
    Rational c_lo = enclose(c.constant, 64).lo;
    if (f.filter) {
      // Each selected block contributes >= c_lo; return the heap index of the
      // harmonic block after which the partial sum exceeds the threshold.
      Integer blocks = floor_of(threshold / c_lo) + 1;
      if (!blocks.fits_ulong_p() || blocks.get_ui() > 60) throw Error(ErrorCode::InvalidArgument, "index out of range");
      auto cut = f.filter->cut();
      std::uint64_t counted = 0;
      for (std::size_t i = 0; i < 64; ++i) {
        std::uint64_t k = f.filter->derived(i);
        if (cut && k <= *cut) continue;
        if (k > 40) break;
        if (++counted == blocks.get_ui()) {
          out.index = Integer(static_cast<unsigned long>(AlmostDisjointIndex::block_start(k + 1) - 1));
          return out;
        }
      }
      throw Error(ErrorCode::InvalidArgument, "index out of range");
    }
    // sum_{m <= 2^k} m^-a >= sum_{m <= 2^k} 1/m >= 1 + k/2.
    Integer k = floor_of(2 * (threshold / c_lo - 1)) + 1;
    if (k < 0) k = 0;
    out.dyadic = true;
    out.log2 = k;
    if (k <= 65536) mpz_ui_pow_ui(out.index.get_mpz_t(), 2, k.get_ui());
    return out;
  }
  throw Error(ErrorCode::InvalidArgument, "no divergence index for " + to_string(c.type));
}

// ---------------------------------------------------------------------------
// Strand selection and boundedness

Verdict sup_verdict(const Strand& s) {
  Verdict v;
  if (s.kind == StrandKind::FactorialDyadic) {
    ExponentialSum es{s.values};
    if (es.is_zero() || es.terms.front().second < 2) {
      v.converges = true;
      v.cert.type = CertType::FactorialRatio;
      return v;
    }
    v.converges = false;
    v.cert.type = CertType::UnboundedValues;
    v.cert.beta1 = es.terms.front().first;
    v.cert.theta1 = es.terms.front().second;
    v.cert.j0 = es.dominance_threshold();
    return v;
  }
  MassFamily coeffs;
  coeffs.kind = StrandKind::GeometricP;
  coeffs.q = 1;
  coeffs.C = s.scale * s.A;
  coeffs.a = s.alpha;
  coeffs.rho = s.delta;
  coeffs.filter = s.filter;
  if (s.delta > kOne || (s.delta == kOne && s.alpha < 0)) return series_verdict(coeffs, false);
  v.converges = true;
  return v;
}

std::optional<std::uint64_t> select_strand(const Group& g, const Rational& q, std::uint64_t limit) {
  if (g.select) {
    auto l = g.select(q);
    if (!l || (g.count && *l > *g.count)) return std::nullopt;
    if (series_verdict(q_mass_family(g.strand(*l), q), false).converges)
      throw Error(ErrorCode::UnclassifiableFamily, "selected strand " + std::to_string(*l) + " of " + g.id + " converges at q");
    return l;
  }
  std::uint64_t last = g.count ? std::min(*g.count, limit) : limit;
  for (std::uint64_t l = 1; l <= last; ++l) {
    Strand s = g.strand(l);
    if (!series_verdict(q_mass_family(s, q), false).converges) return l;
  }
  return std::nullopt;
}

namespace {

std::optional<std::uint64_t> select_unbounded(const Group& g, std::uint64_t limit = 64) {
  std::uint64_t last = g.count ? std::min(*g.count, limit) : limit;
  for (std::uint64_t l = 1; l <= last; ++l)
    if (!sup_verdict(g.strand(l)).converges) return l;
  return std::nullopt;
}

Verdict target_verdict(const Strand& s, const Target& t) {
  if (t.kind == Target::Kind::Linf) return sup_verdict(s);
  return series_verdict(q_mass_family(s, t.q), false);
}

std::string family_text(const Strand& s, const Target& t) {
  if (t.kind == Target::Kind::Linf) return s.family_key();
  return q_mass_family(s, t.q).describe();
}

bool same_certificate_shape(const Certificate& a, const Certificate& b) {
  if (a.type != b.type) return false;
  switch (a.type) {
    case CertType::RatioTest:
    case CertType::GeometricGrowth: return a.rho == b.rho;
    case CertType::PSeries:
    case CertType::HarmonicComparison: return a.exponent == b.exponent && a.filter_seed == b.filter_seed;
    case CertType::UnboundedValues: return a.beta1 == b.beta1 && a.theta1 == b.theta1 && a.j0 == b.j0;
    case CertType::FactorialRatio: return true;
  }
  return false;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string Target::claim() const {
  if (kind == Kind::Linf) return "NowhereLinf";
  return "NowhereLq(" + q.get_str() + ")";
}

Report nowhere_report(const Witness& w, const Target& target, std::uint64_t depth) {
  auto t0 = std::chrono::steady_clock::now();
  Report r;
  r.claim = target.claim();
  r.depth = depth;
  if (target.kind == Target::Kind::Lq && target.q <= 0) throw Error(ErrorCode::InvalidArgument, "q must be positive");
  std::optional<std::uint64_t> chosen_l;
  std::optional<Certificate> shape;
  bool shapes_agree = true;
  try {
    for (std::uint64_t n = 0; n <= depth; ++n) {
      SetExprPtr u = enumerate_base(w.space, n);
      bool found = false;
      for (std::size_t gi : w.residents(n)) {
        const Group& g = w.groups.at(gi);
        if (!contains(*u, *g.support)) continue;
        auto l = target.kind == Target::Kind::Linf ? select_unbounded(g) : select_strand(g, target.q);
        if (!l) continue;
        Strand s = g.strand(*l);
        Verdict v = target_verdict(s, target);
        if (v.converges) continue;
        if (!chosen_l) chosen_l = *l;
        if (!shape) shape = v.cert;
        else if (*chosen_l != *l || !same_certificate_shape(*shape, v.cert)) shapes_agree = false;
        r.verdicts.push_back(BaseVerdict{n, g.id, *l, family_text(s, target), v});
        found = true;
        break;
      }
      if (!found)
        throw Error(ErrorCode::MissingResident, "no resident divergent strand inside base element " + std::to_string(n));
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::MissingResident) throw;
    r.granted = false;
    r.reason = e.what();
    r.seconds = seconds_since(t0);
    return r;
  }
  // Uniform rule: the template strand diverges with the same certificate shape
  // seen at every explicit index, so every later group does too.
  if (w.generic && chosen_l && shapes_agree) {
    Strand s = w.generic(*chosen_l);
    Verdict v = target_verdict(s, target);
    if (!v.converges && same_certificate_shape(*shape, v.cert)) {
      r.uniform = true;
      r.uniform_rule = w.uniform_rule + "; strand " + std::to_string(*chosen_l) + " family " + family_text(s, target) +
                       " diverges by " + to_string(v.cert.type) + " independently of the base index";
      Integer through;
      mpz_ui_pow_ui(through.get_mpz_t(), 2, depth + 1);
      through -= 2;
      r.uniform_through = through.fits_ulong_p() ? through.get_ui() : ~std::uint64_t{0};
    }
  }
  r.granted = r.uniform;
  if (!r.granted) r.reason = "no uniform certificate beyond the explicit depth";
  r.seconds = seconds_since(t0);
  return r;
}

Report p_report(const Witness& w) {
  auto t0 = std::chrono::steady_clock::now();
  Report r;
  r.claim = "InLp(" + w.p.get_str() + ")";
  r.granted = true;
  for (const auto& g : w.groups) {
    std::uint64_t lim = g.count ? std::min<std::uint64_t>(*g.count, 6) : 6;
    for (std::uint64_t l = 1; l <= lim; ++l) {
      Strand s = g.strand(l);
      MassFamily f = q_mass_family(s, w.p);
      Verdict v = series_verdict(f, false);
      r.verdicts.push_back(BaseVerdict{g.home.value_or(0), g.id, l, f.describe(), v});
      if (!v.converges) {
        r.granted = false;
        r.reason = "strand " + s.label + " diverges at p";
      }
    }
    if ((!g.count || *g.count > lim) && !g.tail_pmass) {
      r.granted = false;
      r.reason = "group " + g.id + " has no exact tail";
    }
  }
  r.uniform = r.granted;
  r.uniform_rule = "strands beyond the explicit ones carry exact normalized p-mass";
  r.seconds = seconds_since(t0);
  return r;
}

Report global_divergence_report(const Witness& w, const Rational& q) {
  auto t0 = std::chrono::steady_clock::now();
  Report r;
  r.claim = "NotInLq(" + q.get_str() + ")";
  for (const auto& g : w.groups) {
    auto l = select_strand(g, q, 256);
    if (!l) continue;
    Strand s = g.strand(*l);
    MassFamily f = q_mass_family(s, q);
    Verdict v = series_verdict(f, false);
    r.verdicts.push_back(BaseVerdict{g.home.value_or(0), g.id, *l, f.describe(), v});
    r.granted = true;
    break;
  }
  if (!r.granted) r.reason = "no strand diverges at q";
  r.seconds = seconds_since(t0);
  return r;
}

nlohmann::json Report::to_json(bool include_timing) const {
  ordered_json j;
  j["witness_hash"] = witness_hash;
  j["claim"] = claim;
  j["depth"] = depth;
  j["uniform"] = uniform;
  j["granted"] = granted;
  if (!reason.empty()) j["reason"] = reason;
  if (!uniform_rule.empty()) j["uniform_rule"] = uniform_rule;
  if (uniform) j["uniform_through"] = uniform_through;
  ordered_json arr = ordered_json::array();
  for (const auto& bv : verdicts) {
    ordered_json e;
    e["n"] = bv.n;
    e["group"] = bv.group;
    e["strand"] = bv.strand;
    e["verdict"] = bv.verdict.name();
    e["type"] = to_string(bv.verdict.cert.type);
    e["params"] = bv.verdict.cert.to_json();
    e["family"] = bv.family;
    arr.push_back(e);
  }
  j["verdicts"] = arr;
  if (include_timing) j["seconds"] = seconds;
  return j;
}

// ---------------------------------------------------------------------------

IsometryResult isometry_check(const std::vector<Witness>& family, const std::vector<Rational>& coeffs,
                              const Rational& p) {
  if (family.size() != coeffs.size()) throw Error(ErrorCode::InvalidArgument, "one coefficient per witness");
  for (std::size_t i = 0; i < family.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      for (const auto& a : family[i].groups)
        for (const auto& b : family[j].groups)
          if (!disjoint(*a.support, *b.support))
            throw Error(ErrorCode::OverlapDetected, "witnesses " + std::to_string(j) + " and " + std::to_string(i) +
                                                        " overlap (" + a.id + ", " + b.id + ")");
  IsometryResult res;
  res.pmass = Enclosure::exact(Rational(0));
  res.target = 0;
  Rational tol = 0;
  int bits = 48;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (family[i].p != p) throw Error(ErrorCode::InvalidArgument, "witness exponent differs from p");
    if (coeffs[i] == 0) continue;
    ExactPosReal cp = ExactPosReal::power(abs(coeffs[i]), p);
    Enclosure ce = cp.is_rational() ? Enclosure::exact(cp.scale()) : enclose(cp, bits);
    Enclosure pm = strands_pmass(family[i], pow2(-24));
    res.pmass = res.pmass + ce * pm;
    res.target += ce.mid();
    // Relative error of this member's p-mass around 1, plus the coefficient enclosure.
    Rational dev = std::max<Rational>(pm.hi - 1, 1 - pm.lo) + ce.width() / ce.lo;
    tol = std::max<Rational>(tol, dev);
  }
  if (res.target == 0) throw Error(ErrorCode::InvalidArgument, "all coefficients are zero");
  res.tolerance = tol;
  Enclosure window{res.target * (1 - tol), res.target * (1 + tol), Rational(0)};
  res.within = res.pmass.intersects(window);
  return res;
}

FreenessResult freeness_check(const std::vector<Integer>& thetas, const PolynomialExpr& poly) {
  ExponentialSum es = evaluate_generators(thetas, poly);
  FreenessResult r;
  if (es.is_zero()) {
    r.zero = true;
    return r;
  }
  r.beta1 = es.terms.front().first;
  r.theta1 = es.terms.front().second;
  r.j0 = es.dominance_threshold();
  return r;
}

}  // namespace pforge
