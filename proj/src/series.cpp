#include "pforge/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <numeric>
#include <sstream>

#include "pforge/certify.hpp"
#include "pforge/error.hpp"
#include "pforge/ledger.hpp"

namespace pforge {

// ---------------------------------------------------------------------------
// AlmostDisjointIndex

namespace {

bool is_bits(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == '0' || c == '1'; });
}

std::mutex block_mutex;
std::vector<std::uint64_t> block_table{1};

// Exact check of sum_{i=a}^{b-1} 1/i >= 1.
bool block_sum_reaches_one(std::uint64_t a, std::uint64_t b) {
  Rational s = 0;
  for (std::uint64_t i = a; i < b; ++i) s += Rational(1, static_cast<unsigned long>(i));
  return s >= 1;
}

void extend_blocks_past(std::uint64_t m) {
  while (block_table.back() <= m) {
    std::uint64_t start = block_table.back();
    long double sum = 0;
    std::uint64_t n = start;
    while (sum < 1.0L) {
      sum += 1.0L / static_cast<long double>(n);
      ++n;
    }
    // n is the first index with the floating sum >= 1; settle borderline cases exactly.
    long double margin = 1e-15L * static_cast<long double>(n - start + 1);
    if (sum - 1.0L < margin) {
      while (!block_sum_reaches_one(start, n)) ++n;
      while (n - 1 > start && block_sum_reaches_one(start, n - 1)) --n;
    } else if (n - 1 > start) {
      long double prev = sum - 1.0L / static_cast<long double>(n - 1);
      if (1.0L - prev < margin && block_sum_reaches_one(start, n - 1)) --n;
    }
    block_table.push_back(n);
  }
}

}  // namespace

AlmostDisjointIndex::AlmostDisjointIndex(std::string prefix, std::string period)
    : prefix_(std::move(prefix)), period_(std::move(period)) {
  if (period_.empty() || !is_bits(prefix_) || !is_bits(period_))
    throw Error(ErrorCode::InvalidArgument, "seed needs a bit-string prefix and a non-empty bit-string period");
}

AlmostDisjointIndex AlmostDisjointIndex::parse(std::string_view seed) {
  auto bar = seed.find('|');
  if (bar == std::string_view::npos) throw Error(ErrorCode::ParseError, "seed must be 'prefix|period'");
  auto at = seed.find('@', bar);
  AlmostDisjointIndex a(std::string(seed.substr(0, bar)), std::string(seed.substr(bar + 1, at == std::string_view::npos ? std::string_view::npos : at - bar - 1)));
  if (at != std::string_view::npos) {
    std::string k(seed.substr(at + 1));
    if (k.empty() || !std::all_of(k.begin(), k.end(), [](char c) { return c >= '0' && c <= '9'; }))
      throw Error(ErrorCode::ParseError, "bad block cut in seed");
    a.cut_ = std::stoull(k);
  }
  return a;
}

std::string AlmostDisjointIndex::seed() const {
  std::string s = prefix_ + "|" + period_;
  if (cut_) s += "@" + std::to_string(*cut_);
  return s;
}

AlmostDisjointIndex AlmostDisjointIndex::after_block(std::uint64_t k) const {
  AlmostDisjointIndex a = *this;
  a.cut_ = cut_ ? std::max(*cut_, k) : k;
  return a;
}

char AlmostDisjointIndex::bit(std::size_t i) const {
  if (i < prefix_.size()) return prefix_[i];
  return period_[(i - prefix_.size()) % period_.size()];
}

std::string AlmostDisjointIndex::branch(std::size_t length) const {
  std::string s;
  s.reserve(length);
  for (std::size_t i = 0; i < length; ++i) s += bit(i);
  return s;
}

std::uint64_t AlmostDisjointIndex::derived(std::size_t i) const {
  if (i > 62) throw Error(ErrorCode::InvalidArgument, "derived index out of range");
  std::uint64_t v = 0;
  for (std::size_t t = 0; t < i; ++t) v = v * 2 + (bit(t) == '1' ? 1 : 0);
  return (std::uint64_t{1} << i) - 1 + v;
}

bool AlmostDisjointIndex::in_derived(std::uint64_t k) const {
  std::size_t i = 0;
  while (i < 63 && (std::uint64_t{1} << (i + 1)) <= k + 1) ++i;
  return derived(i) == k;
}

bool AlmostDisjointIndex::contains(std::uint64_t m) const {
  if (m == 0) return false;
  std::uint64_t k = block_of(m);
  if (cut_ && k <= *cut_) return false;
  return in_derived(k);
}

std::size_t AlmostDisjointIndex::split_point(const AlmostDisjointIndex& other) const {
  std::size_t limit = prefix_.size() + other.prefix_.size() + std::lcm(period_.size(), other.period_.size()) + 1;
  for (std::size_t i = 0; i < limit; ++i)
    if (bit(i) != other.bit(i)) return i;
  throw Error(ErrorCode::SeedCollision, "seeds " + seed() + " and " + other.seed() + " select the same branch");
}

std::uint64_t AlmostDisjointIndex::block_start(std::uint64_t k) {
  std::lock_guard<std::mutex> lock(block_mutex);
  while (block_table.size() <= k + 1) extend_blocks_past(block_table.back());
  return block_table[k];
}

std::uint64_t AlmostDisjointIndex::block_of(std::uint64_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "blocks start at 1");
  std::lock_guard<std::mutex> lock(block_mutex);
  extend_blocks_past(m);
  auto it = std::upper_bound(block_table.begin(), block_table.end(), m);
  return static_cast<std::uint64_t>(it - block_table.begin()) - 1;
}

bool operator==(const AlmostDisjointIndex& a, const AlmostDisjointIndex& b) {
  try {
    a.split_point(b);
    return false;
  } catch (const Error&) {
    return true;
  }
}

// ---------------------------------------------------------------------------
// Strand

namespace {

ExactPosReal power_of_index(std::uint64_t m, const Rational& e) {
  return ExactPosReal::power(Rational(static_cast<unsigned long>(m)), e);
}

SetExprPtr append_address(const SetExprPtr& base, const std::string& suffix) {
  if (const auto* p = base->as<CarrierPiece>())
    return make_set(CarrierPiece{p->carrier, p->host, p->address + suffix});
  if (const auto* d = base->as<Deinterleaved>()) return make_set(Deinterleaved{append_address(d->inner, suffix)});
  throw Error(ErrorCode::UnsupportedLeaf, "cannot address into " + base->type_name());
}

Rational partial_mass(const Strand& s, std::uint64_t m) {
  // sum_{i=1}^{m-1} B gamma^i
  if (s.gamma == 1) return s.B * Rational(static_cast<unsigned long>(m - 1));
  return s.B * s.gamma * (pow_int(s.gamma, static_cast<long>(m) - 1) - 1) / (s.gamma - 1);
}

SetExprPtr placement_set(const Placement& pl, const Strand& s, std::uint64_t m) {
  switch (pl.kind) {
    case Placement::Kind::Carrier: {
      std::string suffix = s.kind == StrandKind::GeometricP ? std::string(m - 1, '1')
                                                            : std::string(ceil_log2_factorial(m), '1');
      return append_address(pl.base, suffix + "0");
    }
    case Placement::Kind::Region: {
      Rational lo = pl.region_start + partial_mass(s, m);
      return make_set(RegionSlice{pl.region, lo, lo + s.mass(m), false});
    }
    case Placement::Kind::Product:
      return rectangle(placement_set(*pl.left, s, m), pl.right);
  }
  throw Error(ErrorCode::InvalidArgument, "bad placement");
}

SetExprPtr placement_support(const Placement& pl) {
  switch (pl.kind) {
    case Placement::Kind::Carrier: return pl.base;
    case Placement::Kind::Region: return make_set(RegionSlice{pl.region, pl.region_start, pl.region_start, true});
    case Placement::Kind::Product: return rectangle(placement_support(*pl.left), pl.right);
  }
  throw Error(ErrorCode::InvalidArgument, "bad placement");
}

}  // namespace

std::optional<Rational> Strand::factorial_value(std::uint64_t j) const {
  Rational v = 0;
  for (const auto& [beta, theta] : values) {
    Integer t;
    mpz_pow_ui(t.get_mpz_t(), theta.get_mpz_t(), j);
    v += beta * Rational(t);
  }
  return v;
}

std::optional<ExactPosReal> Strand::abs_coeff(std::uint64_t m) const {
  if (!admits(m)) return std::nullopt;
  if (kind == StrandKind::GeometricP)
    return scale * A * power_of_index(m, -alpha) * delta.pow(Rational(static_cast<unsigned long>(m)));
  Rational v = *factorial_value(m);
  if (v == 0) return std::nullopt;
  return scale * ExactPosReal(abs(v));
}

Rational Strand::mass(std::uint64_t m) const {
  if (kind == StrandKind::GeometricP) return B * pow_int(gamma, static_cast<long>(m));
  return K * pow2(-static_cast<long>(ceil_log2_factorial(m)));
}

SetExprPtr Strand::term_set(std::uint64_t m) const { return placement_set(placement, *this, m); }

SetExprPtr Strand::support() const { return placement_support(placement); }

std::string Strand::family_key() const {
  std::ostringstream os;
  if (kind == StrandKind::GeometricP) {
    os << "geometric alpha=" << alpha.get_str() << " delta=" << delta.to_string() << " gamma=" << gamma.get_str();
  } else {
    os << "factorial values=";
    for (const auto& [b, t] : values) os << b.get_str() << "*" << t.get_str() << "^j;";
  }
  if (filter) os << " filter=" << filter->seed();
  return os.str();
}

// ---------------------------------------------------------------------------
// Mass families

MassFamily q_mass_family(const Strand& s, const Rational& q) {
  if (q <= 0) throw Error(ErrorCode::InvalidArgument, "exponent q must be positive");
  MassFamily f;
  f.kind = s.kind;
  f.q = q;
  f.filter = s.filter;
  if (s.kind == StrandKind::GeometricP) {
    f.C = s.scale.pow(q) * s.A.pow(q) * ExactPosReal(s.B);
    f.a = s.alpha * q;
    f.rho = s.delta.pow(q) * ExactPosReal(s.gamma);
  } else {
    f.C = s.scale.pow(q);
    f.a = 0;
    f.rho = ExactPosReal();
    f.values = s.values;
    f.K = s.K;
  }
  f.normalizer = s.normalizer;
  return f;
}

struct Normalizer::Lazy {
  std::once_flag once;
  std::function<Enclosure()> compute;
  Enclosure value;
};

Normalizer::Normalizer(Rational p, ExactPosReal exact_part, std::function<Enclosure()> series)
    : p_(std::move(p)), exact_part_(std::move(exact_part)), lazy_(std::make_shared<Lazy>()) {
  lazy_->compute = std::move(series);
}

const Enclosure& Normalizer::series() const {
  std::call_once(lazy_->once, [this] { lazy_->value = lazy_->compute(); });
  return lazy_->value;
}

Enclosure Normalizer::power(const Rational& q) const {
  Enclosure raw = enclose(exact_part_, 96) * series();
  return power_bounds(raw, -q / p_, 96);
}

std::optional<Enclosure> MassFamily::factor() const {
  if (!normalizer) return std::nullopt;
  return normalizer->power(q);
}

std::optional<ExactPosReal> MassFamily::term(std::uint64_t m) const {
  if (m == 0) return std::nullopt;
  if (filter && !filter->contains(m)) return std::nullopt;
  if (kind == StrandKind::GeometricP) return C * power_of_index(m, -a) * rho.pow(Rational(static_cast<unsigned long>(m)));
  Rational v = 0;
  for (const auto& [beta, theta] : values) {
    Integer t;
    mpz_pow_ui(t.get_mpz_t(), theta.get_mpz_t(), m);
    v += beta * Rational(t);
  }
  if (v == 0) return std::nullopt;
  return C * ExactPosReal(K * pow2(-static_cast<long>(ceil_log2_factorial(m)))) * ExactPosReal::power(abs(v), q);
}

std::string MassFamily::describe() const {
  std::ostringstream os;
  if (kind == StrandKind::GeometricP) {
    os << "(" << C.to_string() << ") * m^(" << Rational(-a).get_str() << ") * (" << rho.to_string() << ")^m";
  } else {
    os << "(" << C.to_string() << ") * " << K.get_str() << " * |";
    for (std::size_t i = 0; i < values.size(); ++i)
      os << (i ? " + " : "") << values[i].first.get_str() << "*" << values[i].second.get_str() << "^j";
    os << "|^" << q.get_str() << " * 2^-ceil(log2 j!)";
  }
  if (filter) os << " over A[" << filter->seed() << "]";
  return os.str();
}

namespace {

Rational upper(const ExactPosReal& x) { return enclose(x, 64).hi; }

// Least m >= 1 with ((m+1)/m)^e * rho <= target (e > 0, rho < target).
std::uint64_t ratio_threshold(const Rational& e, const ExactPosReal& rho, const ExactPosReal& target) {
  auto ok = [&](std::uint64_t m) {
    Rational ratio(static_cast<unsigned long>(m + 1), static_cast<unsigned long>(m));
    return ExactPosReal::power(ratio, e) * rho <= target;
  };
  std::uint64_t hi = 1;
  while (!ok(hi)) {
    hi *= 2;
    if (hi > (std::uint64_t{1} << 40)) throw Error(ErrorCode::UnclassifiableFamily, "ratio threshold too large");
  }
  std::uint64_t lo = hi / 2;
  if (lo == 0) return 1;
  while (hi - lo > 1) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

TermGenerator mass_terms(const MassFamily& f) {
  TermGenerator g;
  auto fam = std::make_shared<const MassFamily>(f);
  g.term = [fam](std::uint64_t m) { return fam->term(m); };
  g.first = 1;
  if (f.kind == StrandKind::GeometricP) {
    Ordering c = compare(f.rho, ExactPosReal());
    if (c == Ordering::Less) {
      ExactPosReal rho_tail = f.a >= 0 ? f.rho : f.rho.pow(Rational(1, 2));
      std::uint64_t from = f.a >= 0 ? 1 : ratio_threshold(-f.a, f.rho, rho_tail);
      Rational denom = 1 - upper(rho_tail);
      g.tail_bound = [fam, from, denom](std::uint64_t n) -> std::optional<Rational> {
        if (n + 1 < from) return std::nullopt;
        ExactPosReal next = fam->C * power_of_index(n + 1, -fam->a) * fam->rho.pow(Rational(static_cast<unsigned long>(n + 1)));
        return upper(next) / denom;
      };
    } else if (c == Ordering::Equal && f.a > 1) {
      Rational c_hi = upper(f.C);
      g.tail_bound = [fam, c_hi](std::uint64_t n) -> std::optional<Rational> {
        if (n == 0) return std::nullopt;
        return c_hi * upper(power_of_index(n, 1 - fam->a)) / (fam->a - 1);
      };
    }
  } else {
    Rational value_sum = 0;
    Integer theta_max = 0;
    for (const auto& [b, t] : f.values) {
      value_sum += abs(b);
      theta_max = std::max(theta_max, t);
    }
    if (f.values.empty()) {
      g.tail_bound = [](std::uint64_t) -> std::optional<Rational> { return Rational(0); };
    } else {
      Rational growth = upper(ExactPosReal::power(Rational(theta_max), f.q));
      Rational scale = upper(f.C) * f.K * upper(ExactPosReal::power(value_sum, f.q));
      g.tail_bound = [growth, scale](std::uint64_t n) -> std::optional<Rational> {
        if (Rational(static_cast<unsigned long>(n + 2)) < growth * 2) return std::nullopt;
        Integer fact;
        mpz_fac_ui(fact.get_mpz_t(), n + 1);
        Rational num = scale * pow_int(growth, static_cast<long>(n + 1));
        return num / Rational(fact) * 2;
      };
    }
  }
  return g;
}

Enclosure mass_enclosure(const MassFamily& f, const Rational& goal) {
  auto factor = f.factor();
  if (!factor) return enclose_sum(mass_terms(f), goal);
  Rational factor_hi = std::max<Rational>(factor->hi, Rational(1));
  Enclosure sum = enclose_sum(mass_terms(f), goal / (4 * factor_hi));
  Enclosure e = *factor * sum;
  e.precision_goal = goal;
  return e;
}

// ---------------------------------------------------------------------------
// Witness

std::string to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::Sp: return "sp";
    case WitnessKind::NotBelowP: return "not-below-p";
    case WitnessKind::SpPrime: return "sp-prime";
    case WitnessKind::DenseGen: return "dense-gen";
    case WitnessKind::AlgebraElement: return "algebra";
    case WitnessKind::Simple: return "simple";
    case WitnessKind::Tensor: return "tensor";
  }
  return "?";
}

WitnessKind parse_witness_kind(std::string_view s) {
  for (auto k : {WitnessKind::Sp, WitnessKind::NotBelowP, WitnessKind::SpPrime, WitnessKind::DenseGen,
                 WitnessKind::AlgebraElement, WitnessKind::Simple, WitnessKind::Tensor})
    if (to_string(k) == s) return k;
  throw Error(ErrorCode::ParseError, "unknown witness kind '" + std::string(s) + "'");
}

std::vector<std::size_t> Witness::residents(std::uint64_t n) const {
  if (layout) return layout(n);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].home && *groups[i].home == n) out.push_back(i);
  return out;
}

namespace {

std::uint64_t explicit_count(const Group& g, std::uint64_t explicit_strands) {
  if (g.count && *g.count <= std::max<std::uint64_t>(explicit_strands, 64)) return *g.count;
  return explicit_strands;
}

}  // namespace

Enclosure strand_pmass(const Strand& s, const Rational& p, const Rational& goal) {
  if (s.normalizer && s.normalizer->p() == p) {
    // |N|^p * raw = raw / raw: exact symbolically, enclosed by the ratio.
    const Enclosure& S = s.normalizer->series();
    Enclosure ratio{S.lo / S.hi, S.hi / S.lo, goal};
    ExactPosReal w = s.scale.pow(p);
    Enclosure we = w.is_rational() ? Enclosure::exact(w.scale()) : enclose_to_width(w, goal / 4);
    return we * ratio;
  }
  return mass_enclosure(q_mass_family(s, p), goal);
}

Enclosure strands_pmass(const Witness& w, const Rational& goal, std::uint64_t explicit_strands) {
  std::size_t pieces = 1;
  for (const auto& g : w.groups) pieces += explicit_count(g, explicit_strands);
  Rational each = goal / (2 * Rational(static_cast<unsigned long>(pieces)));
  Enclosure total = w.outer_tail;
  for (const auto& g : w.groups) {
    std::uint64_t lim = explicit_count(g, explicit_strands);
    for (std::uint64_t l = 1; l <= lim; ++l) total = total + strand_pmass(g.strand(l), w.p, each);
    if (!g.count || *g.count > lim) {
      if (!g.tail_pmass) throw Error(ErrorCode::NoTailBound, "group " + g.id + " has no strand tail");
      total = total + g.tail_pmass(lim);
    }
  }
  total.precision_goal = goal;
  return total;
}

void assemble_witness(Witness& w, const AssembleOptions& opts) {
  for (std::size_t i = 0; i < w.groups.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (!disjoint(*w.groups[i].support, *w.groups[j].support))
        throw Error(ErrorCode::DisjointnessViolation,
                    "groups " + w.groups[j].id + " and " + w.groups[i].id + " share support");
    const Group& g = w.groups[i];
    std::uint64_t lim = explicit_count(g, opts.explicit_strands);
    std::vector<SetExprPtr> supports;
    for (std::uint64_t l = 1; l <= lim; ++l) {
      Strand s = g.strand(l);
      SetExprPtr sup = s.support();
      if (!contains(*g.support, *sup))
        throw Error(ErrorCode::DisjointnessViolation, "strand " + s.label + " escapes group " + g.id);
      for (const auto& other : supports)
        if (!disjoint(*sup, *other))
          throw Error(ErrorCode::DisjointnessViolation, "strands inside group " + g.id + " overlap");
      supports.push_back(sup);
      Verdict v = series_verdict(q_mass_family(s, w.p), false);
      if (!v.converges)
        throw Error(ErrorCode::DivergentAtP, "strand " + s.label + " has divergent p-mass: " + to_string(v.cert.type));
    }
  }
  Rational goal = opts.goal;
  if (!w.norm_certified) {
    w.norm = Enclosure::exact(Rational(0));
    return;
  }
  try {
    Enclosure pm = w.groups.empty() && w.outer_tail.hi == 0 ? Enclosure::exact(Rational(0))
                                                            : strands_pmass(w, goal / 4, opts.explicit_strands);
    int bits = 8 + static_cast<int>(std::ceil(-log2_of(goal)));
    Enclosure strand_norm = pm.hi == 0 ? Enclosure::exact(Rational(0)) : power_bounds(pm, 1 / w.p, bits);
    if (w.simple.empty()) {
      w.norm = strand_norm;
    } else {
      Rational simple_pmass = 0;
      bool simple_exact = true;
      for (const auto& s : w.simple) {
        if (s.value == 0) continue;
        ExactPosReal v = ExactPosReal::power(abs(s.value), w.p);
        if (!v.is_rational()) simple_exact = false;
        simple_pmass += measure(*s.set) * upper(v);
      }
      Enclosure sp = simple_pmass == 0 ? Enclosure::exact(Rational(0))
                                       : power_bounds(Enclosure::exact(simple_pmass), 1 / w.p, bits);
      if (w.groups.empty() && simple_exact) {
        w.norm = sp;
      } else if (w.p >= 1) {
        // Minkowski bounds for a simple part overlapping the strands.
        Rational lo = std::max<Rational>(Rational(0), std::max<Rational>(sp.lo - strand_norm.hi, strand_norm.lo - sp.hi));
        w.norm = Enclosure{lo, sp.hi + strand_norm.hi, goal};
      } else {
        w.norm = Enclosure{Rational(0), 2 * (sp.hi + strand_norm.hi), goal};
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NoTailBound) throw;
    w.norm_certified = false;
    w.norm = Enclosure::exact(Rational(0));
    return;
  }
  w.norm.precision_goal = goal;
}

Witness restrict(const Witness& w, std::uint64_t n) {
  SetExprPtr u = enumerate_base(w.space, n);
  Witness r = w;
  r.groups.clear();
  r.simple.clear();
  r.layout = nullptr;
  r.partial = w.partial || w.outer_tail.hi > 0;
  for (const auto& g : w.groups) {
    if (contains(*u, *g.support)) r.groups.push_back(g);
    else if (!disjoint(*u, *g.support)) r.partial = true;
  }
  for (const auto& s : w.simple) {
    if (contains(*u, *s.set)) r.simple.push_back(s);
    else if (!disjoint(*u, *s.set)) r.partial = true;
  }
  r.outer_tail = Enclosure::exact(Rational(0));
  AssembleOptions opts;
  opts.goal = pow2(-16);
  if (r.groups.empty() && r.simple.empty()) r.norm = Enclosure::exact(Rational(0));
  else assemble_witness(r, opts);
  return r;
}

Rational default_goal() {
  const char* env = std::getenv("PATHOLOGY_FORGE_PRECISION");
  if (!env || !*env) return pow2(-20);
  Rational g = parse_rational(env);
  if (g <= 0 || g >= 1 || dyadic_floor(g) != g)
    throw Error(ErrorCode::InvalidArgument, "PATHOLOGY_FORGE_PRECISION must be a power of two below 1");
  return g;
}

}  // namespace pforge
