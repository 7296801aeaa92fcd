#include "pforge/spaces.hpp"

#include <sstream>

#include "pforge/error.hpp"

namespace pforge {

SpaceModel SpaceModel::product(const SpaceModel& left, const SpaceModel& right) {
  SpaceModel m(ModelKind::Product);
  m.left_ = std::make_shared<const SpaceModel>(left);
  m.right_ = std::make_shared<const SpaceModel>(right);
  return m;
}

const SpaceModel& SpaceModel::left() const {
  if (!left_) throw Error(ErrorCode::InvalidArgument, "not a product model");
  return *left_;
}

const SpaceModel& SpaceModel::right() const {
  if (!right_) throw Error(ErrorCode::InvalidArgument, "not a product model");
  return *right_;
}

bool SpaceModel::is_probability() const {
  switch (kind_) {
    case ModelKind::UnitInterval:
    case ModelKind::Cantor: return true;
    case ModelKind::HalfLine:
    case ModelKind::Counting: return false;
    case ModelKind::Product: return left_->is_probability() && right_->is_probability();
  }
  return false;
}

bool SpaceModel::is_atomless() const {
  if (kind_ == ModelKind::Counting) return false;
  if (kind_ == ModelKind::Product) return left_->is_atomless() || right_->is_atomless();
  return true;
}

bool SpaceModel::has_infinite_measure() const {
  if (kind_ == ModelKind::HalfLine || kind_ == ModelKind::Counting) return true;
  if (kind_ == ModelKind::Product) return left_->has_infinite_measure() || right_->has_infinite_measure();
  return false;
}

std::string SpaceModel::name() const {
  switch (kind_) {
    case ModelKind::UnitInterval: return "unit-interval";
    case ModelKind::HalfLine: return "half-line";
    case ModelKind::Cantor: return "cantor";
    case ModelKind::Counting: return "counting";
    case ModelKind::Product: return "product(" + left_->name() + "," + right_->name() + ")";
  }
  return "?";
}

SpaceModel SpaceModel::parse(std::string_view text) {
  if (text == "unit-interval") return unit_interval();
  if (text == "half-line") return half_line();
  if (text == "cantor") return cantor();
  if (text == "counting") return counting();
  constexpr std::string_view prefix = "product(";
  if (text.substr(0, prefix.size()) == prefix && text.back() == ')') {
    std::string_view inner = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    int depth = 0;
    for (std::size_t i = 0; i < inner.size(); ++i) {
      if (inner[i] == '(') ++depth;
      else if (inner[i] == ')') --depth;
      else if (inner[i] == ',' && depth == 0) return product(parse(inner.substr(0, i)), parse(inner.substr(i + 1)));
    }
  }
  throw Error(ErrorCode::ParseError, "unknown space '" + std::string(text) + "'");
}

bool operator==(const SpaceModel& a, const SpaceModel& b) {
  if (a.kind_ != b.kind_) return false;
  if (a.kind_ != ModelKind::Product) return true;
  return *a.left_ == *b.left_ && *a.right_ == *b.right_;
}

// ---------------------------------------------------------------------------

std::string stem_of(int level, const Integer& index) {
  std::string s(static_cast<std::size_t>(level), '0');
  for (int i = 0; i < level; ++i)
    if (mpz_tstbit(index.get_mpz_t(), static_cast<mp_bitcnt_t>(level - 1 - i))) s[static_cast<std::size_t>(i)] = '1';
  return s;
}

std::pair<int, Integer> dyadic_of(std::string_view stem) {
  Integer v = 0;
  for (char c : stem) {
    if (c != '0' && c != '1') throw Error(ErrorCode::ParseError, "stem must be a bit string");
    v = v * 2 + (c == '1' ? 1 : 0);
  }
  return {static_cast<int>(stem.size()), v};
}

SetExprPtr make_set(SetExpr::Node node) { return std::make_shared<const SetExpr>(std::move(node)); }
SetExprPtr dyadic(int level, const Integer& index) { return make_set(DyadicInterval{level, index}); }
SetExprPtr cylinder(std::string stem) { return make_set(Cylinder{std::move(stem)}); }
SetExprPtr rectangle(SetExprPtr left, SetExprPtr right) { return make_set(Rectangle{std::move(left), std::move(right)}); }
SetExprPtr disjoint_union(std::vector<SetExprPtr> children) { return make_set(Union{std::move(children)}); }

std::string SetExpr::type_name() const {
  return std::visit(
      [](const auto& n) -> std::string {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DyadicInterval>) return "DyadicInterval";
        else if constexpr (std::is_same_v<T, Cylinder>) return "Cylinder";
        else if constexpr (std::is_same_v<T, IndexRange>) return "IndexRange";
        else if constexpr (std::is_same_v<T, CarrierPiece>) return "CarrierRef";
        else if constexpr (std::is_same_v<T, RegionSlice>) return "RegionSlice";
        else if constexpr (std::is_same_v<T, Rectangle>) return "Rectangle";
        else if constexpr (std::is_same_v<T, Deinterleaved>) return "Deinterleaved";
        else return "Union";
      },
      node_);
}

std::string SetExpr::to_string() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DyadicInterval>) {
          Rational lo = Rational(n.index) * pow2(-n.level);
          Rational hi = Rational(n.index + 1) * pow2(-n.level);
          os << "[" << lo.get_str() << "," << hi.get_str() << ")";
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          os << "<" << n.stem << ">";
        } else if constexpr (std::is_same_v<T, IndexRange>) {
          os << "{" << n.start.get_str() << ".." << Integer(n.end - 1).get_str() << "}";
        } else if constexpr (std::is_same_v<T, CarrierPiece>) {
          os << "carrier#" << n.carrier << "@" << n.host->to_string() << ":" << n.address;
        } else if constexpr (std::is_same_v<T, RegionSlice>) {
          if (n.base.kind == RegionBase::Kind::LedgerComplement) os << "complement";
          else os << "blocks(" << n.base.offset.get_str() << "+" << n.base.stride.get_str() << "i)";
          os << "[" << n.lo.get_str() << "," << (n.unbounded ? std::string("inf") : n.hi.get_str()) << ")";
        } else if constexpr (std::is_same_v<T, Rectangle>) {
          os << n.left->to_string() << " x " << n.right->to_string();
        } else if constexpr (std::is_same_v<T, Deinterleaved>) {
          os << "deinterleave(" << n.inner->to_string() << ")";
        } else {
          os << "U{";
          for (std::size_t i = 0; i < n.children.size(); ++i) os << (i ? ", " : "") << n.children[i]->to_string();
          os << "}";
        }
      },
      node_);
  return os.str();
}

Rational measure(const SetExpr& s) {
  return std::visit(
      [](const auto& n) -> Rational {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DyadicInterval>) return pow2(-n.level);
        else if constexpr (std::is_same_v<T, Cylinder>) return pow2(-static_cast<long>(n.stem.size()));
        else if constexpr (std::is_same_v<T, IndexRange>) return Rational(n.end > n.start ? Integer(n.end - n.start) : Integer(0));
        else if constexpr (std::is_same_v<T, CarrierPiece>)
          return measure(*n.host) * pow2(-static_cast<long>(n.address.size()) - 1);
        else if constexpr (std::is_same_v<T, RegionSlice>) {
          if (n.unbounded) throw Error(ErrorCode::InvalidArgument, "unbounded region has infinite measure");
          return n.hi > n.lo ? Rational(n.hi - n.lo) : Rational(0);
        }
        else if constexpr (std::is_same_v<T, Rectangle>) return measure(*n.left) * measure(*n.right);
        else if constexpr (std::is_same_v<T, Deinterleaved>) return measure(*n.inner);
        else {
          Rational total = 0;
          for (const auto& c : n.children) total += measure(*c);
          return total;
        }
      },
      s.node());
}

std::pair<Rational, Rational> interval_bounds(const SetExpr& leaf) {
  if (const auto* d = leaf.as<DyadicInterval>()) {
    Rational w = pow2(-d->level);
    return {Rational(d->index) * w, Rational(d->index + 1) * w};
  }
  if (const auto* c = leaf.as<Cylinder>()) {
    auto [level, index] = dyadic_of(c->stem);
    Rational w = pow2(-level);
    return {Rational(index) * w, Rational(index + 1) * w};
  }
  throw Error(ErrorCode::UnsupportedLeaf, "no interval picture for " + leaf.type_name());
}

Rational fat_cantor_gap_length(const Rational& len, std::size_t stage) {
  return len * pow2(-2 * static_cast<long>(stage));
}

namespace {

Rational stage_length(const Rational& len, std::size_t k) {
  long kk = static_cast<long>(k);
  return len * (pow2(-kk - 1) + pow2(-2 * kk - 1));
}

}  // namespace

std::pair<Rational, Rational> fat_cantor_stage_interval(const Rational& lo, const Rational& len,
                                                        std::string_view address) {
  Rational x = lo;
  for (std::size_t t = 0; t < address.size(); ++t) {
    if (address[t] == '1') x += stage_length(len, t + 1) + fat_cantor_gap_length(len, t + 1);
    else if (address[t] != '0') throw Error(ErrorCode::ParseError, "carrier address must be a bit string");
  }
  return {x, x + stage_length(len, address.size())};
}

namespace {

enum class Domain { Any, Line, Cantor, Counting, Product };

Domain domain_of(const SetExpr& s) {
  return std::visit(
      [](const auto& n) -> Domain {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, DyadicInterval>) return Domain::Line;
        else if constexpr (std::is_same_v<T, Cylinder>) return Domain::Cantor;
        else if constexpr (std::is_same_v<T, IndexRange>) return Domain::Counting;
        else if constexpr (std::is_same_v<T, CarrierPiece>) return domain_of(*n.host);
        else if constexpr (std::is_same_v<T, RegionSlice>) return Domain::Any;
        else if constexpr (std::is_same_v<T, Rectangle> || std::is_same_v<T, Deinterleaved>) return Domain::Product;
        else {
          for (const auto& c : n.children) {
            Domain d = domain_of(*c);
            if (d != Domain::Any) return d;
          }
          return Domain::Any;
        }
      },
      s.node());
}

void check_comparable(const SetExpr& a, const SetExpr& b) {
  Domain da = domain_of(a);
  Domain db = domain_of(b);
  if (da != Domain::Any && db != Domain::Any && da != db)
    throw Error(ErrorCode::IncomparableModels, a.to_string() + " vs " + b.to_string());
}

bool is_prefix(std::string_view p, std::string_view s) { return p.size() <= s.size() && s.substr(0, p.size()) == p; }

std::string odd_bits(std::string_view s) {
  std::string r;
  for (std::size_t i = 0; i < s.size(); i += 2) r += s[i];
  return r;
}

std::string even_bits(std::string_view s) {
  std::string r;
  for (std::size_t i = 1; i < s.size(); i += 2) r += s[i];
  return r;
}

// Stem of a cylinder-like leaf (cylinder or carrier hosted in a cylinder).
const Cylinder* cylinder_host(const SetExpr& s) {
  if (const auto* c = s.as<Cylinder>()) return c;
  if (const auto* p = s.as<CarrierPiece>()) return p->host->as<Cylinder>();
  return nullptr;
}

bool basic_contains(const SetExpr& outer, const SetExpr& inner) {
  if (const auto* a = outer.as<DyadicInterval>()) {
    if (const auto* b = inner.as<DyadicInterval>()) {
      if (a->level > b->level) return false;
      Integer shifted;
      mpz_fdiv_q_2exp(shifted.get_mpz_t(), b->index.get_mpz_t(), static_cast<mp_bitcnt_t>(b->level - a->level));
      return shifted == a->index;
    }
  }
  if (const auto* a = outer.as<Cylinder>()) {
    if (const auto* b = inner.as<Cylinder>()) return is_prefix(a->stem, b->stem);
  }
  return false;
}

// True when the fat Cantor set below the closed stage interval [c, d] (stage
// `stage` of a host of length len) misses [a, b).
bool fat_cantor_avoids(const Rational& len, const Rational& c, const Rational& d, std::size_t stage,
                       const Rational& a, const Rational& b) {
  if (b <= c || a >= d) return true;
  if (a <= c && d <= b) return false;
  if (stage > 512) return false;
  Rational child = stage_length(len, stage + 1);
  return fat_cantor_avoids(len, c, c + child, stage + 1, a, b) &&
         fat_cantor_avoids(len, d - child, d, stage + 1, a, b);
}

bool piece_avoids_interval(const CarrierPiece& p, const Rational& a, const Rational& b) {
  auto [hlo, hhi] = interval_bounds(*p.host);
  Rational len = hhi - hlo;
  auto [c, d] = fat_cantor_stage_interval(hlo, len, p.address);
  return fat_cantor_avoids(len, c, d, p.address.size(), a, b);
}

// Real-line span [start, end] of a region slice (blocks of length 1).
std::pair<Rational, Rational> region_span(const RegionSlice& r) {
  if (r.unbounded) throw Error(ErrorCode::InvalidArgument, "unbounded region has no finite span");
  Integer first = floor_of(r.lo);
  Integer last = ceil_of(r.hi) - 1;
  Rational start = Rational(r.base.offset + first * r.base.stride) + (r.lo - Rational(first));
  Rational end = Rational(r.base.offset + last * r.base.stride) + (r.hi - Rational(last));
  return {start, end};
}

bool progressions_disjoint(const RegionBase& x, const RegionBase& y) {
  Integer g;
  mpz_gcd(g.get_mpz_t(), x.stride.get_mpz_t(), y.stride.get_mpz_t());
  Integer diff = y.offset - x.offset;
  Integer r;
  mpz_fdiv_r(r.get_mpz_t(), diff.get_mpz_t(), g.get_mpz_t());
  return r != 0;
}

}  // namespace

bool contains(const SetExpr& outer, const SetExpr& inner) {
  check_comparable(outer, inner);
  if (const auto* u = inner.as<Union>()) {
    for (const auto& c : u->children)
      if (!contains(outer, *c)) return false;
    return true;
  }
  if (const auto* u = outer.as<Union>()) {
    for (const auto& c : u->children)
      if (contains(*c, inner)) return true;
    return false;
  }
  if (basic_contains(outer, inner)) return true;

  if (const auto* a = outer.as<IndexRange>()) {
    if (const auto* b = inner.as<IndexRange>()) return b->start >= b->end || (a->start <= b->start && b->end <= a->end);
    if (const auto* r = inner.as<RegionSlice>()) {
      if (r->base.kind != RegionBase::Kind::UnitBlocks || r->unbounded) return false;
      auto [s, e] = region_span(*r);
      return Rational(a->start) <= s && e <= Rational(a->end);
    }
    return false;
  }

  if (const auto* p = inner.as<CarrierPiece>()) {
    if (const auto* q = outer.as<CarrierPiece>())
      return q->carrier == p->carrier && same_set(*q->host, *p->host) && is_prefix(q->address, p->address);
    if (contains(outer, *p->host)) return true;
    if ((outer.as<DyadicInterval>() || outer.as<Cylinder>()) && basic_contains(*p->host, outer)) {
      auto [a, b] = interval_bounds(outer);
      auto [hlo, hhi] = interval_bounds(*p->host);
      auto [c, d] = fat_cantor_stage_interval(hlo, hhi - hlo, p->address);
      return a <= c && d <= b;
    }
    return false;
  }

  if (const auto* a = outer.as<RegionSlice>()) {
    if (const auto* b = inner.as<RegionSlice>()) {
      if (!b->unbounded && b->lo >= b->hi) return true;
      bool same_base = a->base.kind == b->base.kind && a->base.offset == b->base.offset && a->base.stride == b->base.stride;
      if (same_base) return a->lo <= b->lo && (a->unbounded || (!b->unbounded && b->hi <= a->hi));
      // A whole progression contains every sub-progression of it.
      if (a->base.kind != b->base.kind || !a->unbounded || a->lo != 0 || b->lo < 0) return false;
      Integer diff = b->base.offset - a->base.offset;
      return diff >= 0 && mpz_divisible_p(b->base.stride.get_mpz_t(), a->base.stride.get_mpz_t()) &&
             mpz_divisible_p(diff.get_mpz_t(), a->base.stride.get_mpz_t());
    }
    return false;
  }
  if (const auto* r = inner.as<RegionSlice>()) {
    if (r->base.kind != RegionBase::Kind::UnitBlocks || r->unbounded || !outer.as<DyadicInterval>()) return false;
    auto [a, b] = interval_bounds(outer);
    auto [s, e] = region_span(*r);
    return a <= s && e <= b;
  }

  if (const auto* a = outer.as<Rectangle>()) {
    if (const auto* b = inner.as<Rectangle>()) return contains(*a->left, *b->left) && contains(*a->right, *b->right);
    if (const auto* d = inner.as<Deinterleaved>()) {
      const Cylinder* c = cylinder_host(*d->inner);
      const auto* la = a->left->as<Cylinder>();
      const auto* ra = a->right->as<Cylinder>();
      if (!c || !la || !ra) return false;
      return is_prefix(la->stem, odd_bits(c->stem)) && is_prefix(ra->stem, even_bits(c->stem));
    }
    return false;
  }
  if (const auto* a = outer.as<Deinterleaved>()) {
    if (const auto* d = inner.as<Deinterleaved>()) return contains(*a->inner, *d->inner);
    if (const auto* b = inner.as<Rectangle>()) {
      const auto* c = a->inner->as<Cylinder>();
      const auto* lb = b->left->as<Cylinder>();
      const auto* rb = b->right->as<Cylinder>();
      if (!c || !lb || !rb) return false;
      return is_prefix(odd_bits(c->stem), lb->stem) && is_prefix(even_bits(c->stem), rb->stem);
    }
  }
  return false;
}

bool disjoint(const SetExpr& a, const SetExpr& b) {
  check_comparable(a, b);
  auto empty = [](const SetExpr& s) {
    if (const auto* r = s.as<RegionSlice>()) return !r->unbounded && r->hi <= r->lo;
    return measure(s) == 0;
  };
  if (empty(a) || empty(b)) return true;
  if (const auto* u = a.as<Union>()) {
    for (const auto& c : u->children)
      if (!disjoint(*c, b)) return false;
    return true;
  }
  if (b.as<Union>()) return disjoint(b, a);

  auto interval_like = [](const SetExpr& s) { return s.as<DyadicInterval>() || s.as<Cylinder>(); };
  if (interval_like(a) && interval_like(b)) return !basic_contains(a, b) && !basic_contains(b, a);

  if (const auto* x = a.as<IndexRange>()) {
    if (const auto* y = b.as<IndexRange>()) return x->end <= y->start || y->end <= x->start;
    if (const auto* r = b.as<RegionSlice>()) {
      if (r->unbounded) return false;
      auto [s, e] = region_span(*r);
      return e <= Rational(x->start) || s >= Rational(x->end);
    }
    return false;
  }
  if (a.as<RegionSlice>() && b.as<IndexRange>()) return disjoint(b, a);

  if (const auto* p = a.as<CarrierPiece>()) {
    if (const auto* q = b.as<CarrierPiece>()) {
      if (disjoint(*p->host, *q->host)) return true;
      if (same_set(*p->host, *q->host))
        return p->carrier != q->carrier ? false : !is_prefix(p->address, q->address) && !is_prefix(q->address, p->address);
      if (basic_contains(*p->host, *q->host)) {
        auto [lo, hi] = interval_bounds(*q->host);
        return piece_avoids_interval(*p, lo, hi);
      }
      if (basic_contains(*q->host, *p->host)) {
        auto [lo, hi] = interval_bounds(*p->host);
        return piece_avoids_interval(*q, lo, hi);
      }
      return false;
    }
    if (interval_like(b)) {
      if (disjoint(*p->host, b)) return true;
      if (basic_contains(*p->host, b)) {
        auto [lo, hi] = interval_bounds(b);
        return piece_avoids_interval(*p, lo, hi);
      }
      return false;
    }
    if (const auto* r = b.as<RegionSlice>()) {
      if (r->base.kind == RegionBase::Kind::LedgerComplement) return true;
      if (r->unbounded) return false;
      auto [s, e] = region_span(*r);
      auto [lo, hi] = interval_bounds(*p->host);
      return e <= lo || s >= hi;
    }
    return false;
  }
  if (b.as<CarrierPiece>()) return disjoint(b, a);

  if (const auto* x = a.as<RegionSlice>()) {
    if (const auto* y = b.as<RegionSlice>()) {
      if (x->base.kind != y->base.kind) return false;
      bool same_base = x->base.offset == y->base.offset && x->base.stride == y->base.stride;
      if (x->base.kind == RegionBase::Kind::LedgerComplement || same_base) {
        if (same_base) return (!x->unbounded && x->hi <= y->lo) || (!y->unbounded && y->hi <= x->lo);
      }
      if (progressions_disjoint(x->base, y->base)) return true;
      if (x->unbounded || y->unbounded) return false;
      auto [s1, e1] = region_span(*x);
      auto [s2, e2] = region_span(*y);
      return e1 <= s2 || e2 <= s1;
    }
    if (interval_like(b) && x->base.kind == RegionBase::Kind::UnitBlocks && !x->unbounded) {
      auto [s, e] = region_span(*x);
      auto [lo, hi] = interval_bounds(b);
      return e <= lo || s >= hi;
    }
    return false;
  }
  if (b.as<RegionSlice>()) return disjoint(b, a);

  if (const auto* x = a.as<Rectangle>()) {
    if (const auto* y = b.as<Rectangle>()) return disjoint(*x->left, *y->left) || disjoint(*x->right, *y->right);
    if (const auto* d = b.as<Deinterleaved>()) {
      const Cylinder* c = cylinder_host(*d->inner);
      if (!c) return false;
      Rectangle r{cylinder(odd_bits(c->stem)), cylinder(even_bits(c->stem))};
      return disjoint(a, SetExpr(r));
    }
    return false;
  }
  if (const auto* x = a.as<Deinterleaved>()) {
    if (const auto* y = b.as<Deinterleaved>()) return disjoint(*x->inner, *y->inner);
    if (b.as<Rectangle>()) return disjoint(b, a);
  }
  return false;
}

bool same_set(const SetExpr& a, const SetExpr& b) { return contains(a, b) && contains(b, a); }

std::pair<std::uint64_t, std::uint64_t> unpair(std::uint64_t n) {
  Integer z = Integer(8) * Integer(static_cast<unsigned long>(n)) + 1;
  Integer s;
  mpz_sqrt(s.get_mpz_t(), z.get_mpz_t());
  std::uint64_t w = (s.get_ui() - 1) / 2;
  std::uint64_t t = w * (w + 1) / 2;
  std::uint64_t b = n - t;
  return {w - b, b};
}

std::uint64_t pair(std::uint64_t a, std::uint64_t b) { return (a + b) * (a + b + 1) / 2 + b; }

namespace {

std::pair<int, Integer> level_major(std::uint64_t n) {
  Integer count = Integer(static_cast<unsigned long>(n)) + 1;
  int k = static_cast<int>(mpz_sizeinbase(count.get_mpz_t(), 2)) - 1;
  return {k, Integer(count - (Integer(1) << k))};
}

std::uint64_t level_major_index(int k, const Integer& j) {
  Integer n = (Integer(1) << k) - 1 + j;
  if (!n.fits_ulong_p()) throw Error(ErrorCode::InvalidArgument, "base index overflow");
  return n.get_ui();
}

}  // namespace

SetExprPtr enumerate_base(const SpaceModel& model, std::uint64_t n) {
  switch (model.kind()) {
    case ModelKind::UnitInterval: {
      auto [k, j] = level_major(n);
      return dyadic(k, j);
    }
    case ModelKind::Cantor: {
      auto [k, j] = level_major(n);
      return cylinder(stem_of(k, j));
    }
    case ModelKind::HalfLine: {
      auto [k, j] = unpair(n);
      return dyadic(static_cast<int>(k), Integer(static_cast<unsigned long>(j)));
    }
    case ModelKind::Counting: {
      Integer s(static_cast<unsigned long>(n));
      return make_set(IndexRange{s, s + 1});
    }
    case ModelKind::Product: {
      auto [a, b] = unpair(n);
      return rectangle(enumerate_base(model.left(), a), enumerate_base(model.right(), b));
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model");
}

std::optional<std::uint64_t> base_index_of(const SpaceModel& model, const SetExpr& s) {
  switch (model.kind()) {
    case ModelKind::UnitInterval: {
      const auto* d = s.as<DyadicInterval>();
      if (!d || d->index < 0 || d->index >= (Integer(1) << d->level)) return std::nullopt;
      return level_major_index(d->level, d->index);
    }
    case ModelKind::Cantor: {
      const auto* c = s.as<Cylinder>();
      if (!c) return std::nullopt;
      auto [k, j] = dyadic_of(c->stem);
      return level_major_index(k, j);
    }
    case ModelKind::HalfLine: {
      const auto* d = s.as<DyadicInterval>();
      if (!d || d->level < 0 || d->index < 0 || !d->index.fits_ulong_p()) return std::nullopt;
      return pair(static_cast<std::uint64_t>(d->level), d->index.get_ui());
    }
    case ModelKind::Counting: {
      const auto* r = s.as<IndexRange>();
      if (!r || r->end != r->start + 1 || r->start < 0 || !r->start.fits_ulong_p()) return std::nullopt;
      return r->start.get_ui();
    }
    case ModelKind::Product: {
      const auto* r = s.as<Rectangle>();
      if (!r) return std::nullopt;
      auto a = base_index_of(model.left(), *r->left);
      auto b = base_index_of(model.right(), *r->right);
      if (!a || !b) return std::nullopt;
      return pair(*a, *b);
    }
  }
  return std::nullopt;
}

}  // namespace pforge
