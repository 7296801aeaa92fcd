#include "pforge/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>

#include "pforge/constructions.hpp"
#include "pforge/error.hpp"

namespace pforge {

namespace {

using SetMap = std::function<SetExprPtr(const SetExprPtr&)>;

[[noreturn]] void unsupported(const SetExpr& s, const std::string& why) {
  throw Error(ErrorCode::UnsupportedLeaf, s.type_name() + " " + s.to_string() + ": " + why);
}

std::string interleave_stems(const std::string& x, const std::string& y) {
  std::string out;
  for (std::size_t i = 0; i < std::max(x.size(), y.size()); ++i) {
    if (i < x.size()) out += x[i];
    if (i < y.size()) out += y[i];
  }
  return out;
}

std::string stem_bits(const std::string& s, std::size_t first) {
  std::string out;
  for (std::size_t i = first; i < s.size(); i += 2) out += s[i];
  return out;
}

// All extensions of `stem` to `length` bits.
std::vector<std::string> extensions(const std::string& stem, std::size_t length) {
  std::vector<std::string> out{stem};
  for (std::size_t k = stem.size(); k < length; ++k) {
    std::vector<std::string> next;
    next.reserve(out.size() * 2);
    for (const auto& s : out) {
      next.push_back(s + "0");
      next.push_back(s + "1");
    }
    out = std::move(next);
  }
  return out;
}

inline constexpr std::size_t kMaxPadding = 16;

SetExprPtr map_union(const Union& u, const SetMap& f) {
  std::vector<SetExprPtr> children;
  children.reserve(u.children.size());
  for (const auto& c : u.children) children.push_back(f(c));
  return disjoint_union(std::move(children));
}

bool touches(Side side, bool left) { return side == Side::All || (side == Side::Left) == left; }

SetExprPtr map_product_set(const SetExprPtr& s, const SetMap& left, const SetMap& right) {
  if (const auto* r = s->as<Rectangle>()) return rectangle(left(r->left), right(r->right));
  if (const auto* u = s->as<Union>())
    return map_union(*u, [&](const SetExprPtr& c) { return map_product_set(c, left, right); });
  unsupported(*s, "not a rectangle");
}

SetMap side_map(const SpaceModel& m, BinaryDirection d, Side side) {
  if (m.kind() != ModelKind::Product) return [d](const SetExprPtr& s) { return binary_image(s, d); };
  SetExprPtr (*id)(const SetExprPtr&) = [](const SetExprPtr& s) { return s; };
  SetMap left = touches(side, true) ? side_map(m.left(), d, Side::All) : SetMap(id);
  SetMap right = touches(side, false) ? side_map(m.right(), d, Side::All) : SetMap(id);
  return [left, right](const SetExprPtr& s) { return map_product_set(s, left, right); };
}

// Placement rewriting. For product placements `left`/`right` rewrite the
// factors; `whole` rewrites carrier bases.
Placement rewrite(const Placement& pl, const SetMap& whole, const SetMap* left, const SetMap* right) {
  Placement out = pl;
  switch (pl.kind) {
    case Placement::Kind::Carrier:
      if (pl.base) out.base = whole(pl.base);
      break;
    case Placement::Kind::Region:
      if (pl.base) out.base = whole(pl.base);
      else throw Error(ErrorCode::UnsupportedLeaf, "region placements have no binary picture");
      break;
    case Placement::Kind::Product:
      if (!left || !right) throw Error(ErrorCode::UnsupportedLeaf, "product placement under a non-product transport");
      out.left = std::make_shared<const Placement>(rewrite(*pl.left, *left, nullptr, nullptr));
      out.right = (*right)(pl.right);
      break;
  }
  return out;
}

struct SetTransform {
  SpaceModel from;
  SpaceModel to;
  SetMap whole;
  std::optional<SetMap> left;
  std::optional<SetMap> right;
};

Strand map_strand(const Strand& s, const SetTransform& t) {
  Strand out = s;
  if (s.placement.kind == Placement::Kind::Carrier && !s.placement.base) return out;
  out.placement = rewrite(s.placement, t.whole, t.left ? &*t.left : nullptr, t.right ? &*t.right : nullptr);
  return out;
}

// Groups resident in U_n: those whose home is n first, then any other group
// whose support lies inside U_n.
std::function<std::vector<std::size_t>(std::uint64_t)> layout_for(const SpaceModel& space,
                                                                   const std::vector<Group>& groups) {
  auto homes = std::make_shared<std::vector<std::pair<std::optional<std::uint64_t>, SetExprPtr>>>();
  for (const auto& g : groups) homes->emplace_back(g.home, g.support);
  return [space, homes](std::uint64_t n) {
    std::vector<std::size_t> out;
    SetExprPtr u = enumerate_base(space, n);
    for (std::size_t i = 0; i < homes->size(); ++i)
      if ((*homes)[i].first == n) out.push_back(i);
    for (std::size_t i = 0; i < homes->size(); ++i)
      if ((*homes)[i].first != n && contains(*u, *(*homes)[i].second)) out.push_back(i);
    return out;
  };
}

std::optional<std::uint64_t> map_home(const std::optional<std::uint64_t>& home, const SetTransform& t) {
  if (!home) return std::nullopt;
  try {
    return base_index_of(t.to, *t.whole(enumerate_base(t.from, *home)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnsupportedLeaf) throw;
    return std::nullopt;
  }
}

Witness transform_witness(const Witness& w, const SetTransform& t, nlohmann::json map_params) {
  Witness out = w;
  out.space = t.to;
  auto tp = std::make_shared<const SetTransform>(t);
  for (auto& g : out.groups) {
    g.support = t.whole(g.support);
    g.home = map_home(g.home, t);
    auto inner = g.strand;
    g.strand = [inner, tp](std::uint64_t l) { return map_strand(inner(l), *tp); };
    // Fail early on unsupported placements.
    (void)g.strand(1);
  }
  for (auto& s : out.simple) s.set = t.whole(s.set);
  if (w.generic) {
    auto inner = w.generic;
    out.generic = [inner, tp](std::uint64_t l) { return map_strand(inner(l), *tp); };
  }
  out.layout = layout_for(out.space, out.groups);
  map_params["source"] = w.params;
  out.params = std::move(map_params);
  return out;
}

std::string to_string(BinaryDirection d) { return d == BinaryDirection::ToCantor ? "to-cantor" : "to-interval"; }
std::string to_string(InterleaveDirection d) { return d == InterleaveDirection::Interleave ? "interleave" : "deinterleave"; }
std::string to_string(Side s) {
  switch (s) {
    case Side::All: return "all";
    case Side::Left: return "left";
    case Side::Right: return "right";
  }
  return "all";
}

ExactPosReal abs_power(const Rational& v, const Rational& p) { return ExactPosReal::power(abs(v), p); }

}  // namespace

std::string to_string(TransportTag t) {
  switch (t) {
    case TransportTag::F: return "F";
    case TransportTag::L: return "L";
    case TransportTag::G: return "G";
    case TransportTag::GInverse: return "G-inverse";
    case TransportTag::T: return "T";
    case TransportTag::TInverse: return "T-inverse";
  }
  return "F";
}

TransportTag parse_transport_tag(std::string_view s) {
  for (auto t : {TransportTag::F, TransportTag::L, TransportTag::G, TransportTag::GInverse, TransportTag::T,
                 TransportTag::TInverse})
    if (to_string(t) == s) return t;
  throw Error(ErrorCode::ParseError, "unknown transport map '" + std::string(s) + "'");
}

SetExprPtr binary_image(const SetExprPtr& s, BinaryDirection direction) {
  if (const auto* u = s->as<Union>())
    return map_union(*u, [direction](const SetExprPtr& c) { return binary_image(c, direction); });
  if (const auto* p = s->as<CarrierPiece>())
    return make_set(CarrierPiece{p->carrier, binary_image(p->host, direction), p->address});
  if (direction == BinaryDirection::ToCantor) {
    const auto* d = s->as<DyadicInterval>();
    if (!d) unsupported(*s, "expected a dyadic interval");
    if (d->level < 0 || d->index < 0 || d->index >= (Integer(1) << d->level)) unsupported(*s, "outside [0, 1)");
    return cylinder(stem_of(d->level, d->index));
  }
  const auto* c = s->as<Cylinder>();
  if (!c) unsupported(*s, "expected a cylinder");
  auto [level, index] = dyadic_of(c->stem);
  return dyadic(level, index);
}

SetExprPtr interleave_image(const SetExprPtr& s, InterleaveDirection direction) {
  if (const auto* u = s->as<Union>())
    return map_union(*u, [direction](const SetExprPtr& c) { return interleave_image(c, direction); });
  if (direction == InterleaveDirection::Deinterleave) {
    if (const auto* c = s->as<Cylinder>())
      return rectangle(cylinder(stem_bits(c->stem, 0)), cylinder(stem_bits(c->stem, 1)));
    if (s->as<CarrierPiece>()) return make_set(Deinterleaved{s});
    unsupported(*s, "expected a cylinder or carrier");
  }
  if (const auto* d = s->as<Deinterleaved>()) return d->inner;
  const auto* r = s->as<Rectangle>();
  if (!r) unsupported(*s, "expected a rectangle");
  const auto* x = r->left->as<Cylinder>();
  const auto* y = r->right->as<Cylinder>();
  if (!x || !y) unsupported(*s, "rectangle sides must be cylinders");
  std::size_t lx = x->stem.size();
  std::size_t ly = y->stem.size();
  if (lx == ly || lx == ly + 1) return cylinder(interleave_stems(x->stem, y->stem));
  // Pad the shorter side so the lengths are equal or adjacent.
  std::size_t tx = std::max(lx, ly);
  std::size_t ty = std::max(ly, lx > 0 ? lx - 1 : 0);
  if (tx - lx + ty - ly > kMaxPadding) unsupported(*s, "stem lengths too far apart");
  std::vector<SetExprPtr> parts;
  for (const auto& a : extensions(x->stem, tx))
    for (const auto& b : extensions(y->stem, ty)) parts.push_back(cylinder(interleave_stems(a, b)));
  return disjoint_union(std::move(parts));
}

SpaceModel binary_image(const SpaceModel& m, BinaryDirection direction, Side side) {
  if (m.kind() == ModelKind::Product) {
    SpaceModel l = touches(side, true) ? binary_image(m.left(), direction, Side::All) : m.left();
    SpaceModel r = touches(side, false) ? binary_image(m.right(), direction, Side::All) : m.right();
    return SpaceModel::product(l, r);
  }
  ModelKind need = direction == BinaryDirection::ToCantor ? ModelKind::UnitInterval : ModelKind::Cantor;
  if (m.kind() != need)
    throw Error(ErrorCode::UnsupportedLeaf, "model " + m.name() + " has no binary " + to_string(direction) + " picture");
  return direction == BinaryDirection::ToCantor ? SpaceModel::cantor() : SpaceModel::unit_interval();
}

SpaceModel interleave_image(const SpaceModel& m, InterleaveDirection direction) {
  if (direction == InterleaveDirection::Deinterleave) {
    if (m.kind() != ModelKind::Cantor) throw Error(ErrorCode::UnsupportedLeaf, "de-interleaving needs Cantor space");
    return SpaceModel::product(SpaceModel::cantor(), SpaceModel::cantor());
  }
  if (!(m == SpaceModel::product(SpaceModel::cantor(), SpaceModel::cantor())))
    throw Error(ErrorCode::UnsupportedLeaf, "interleaving needs Cantor x Cantor");
  return SpaceModel::cantor();
}

Witness binary_transport(BinaryDirection direction, const Witness& w, Side side) {
  SetTransform t{w.space, binary_image(w.space, direction, side), side_map(w.space, direction, side), {}, {}};
  if (w.space.kind() == ModelKind::Product) {
    SetExprPtr (*id)(const SetExprPtr&) = [](const SetExprPtr& s) { return s; };
    t.left = touches(side, true) ? side_map(w.space.left(), direction, Side::All) : SetMap(id);
    t.right = touches(side, false) ? side_map(w.space.right(), direction, Side::All) : SetMap(id);
  }
  nlohmann::json p = {{"construction", "transport"}, {"map", "binary"}, {"direction", to_string(direction)},
                      {"side", to_string(side)}};
  return transform_witness(w, t, std::move(p));
}

Witness interleave_transport(InterleaveDirection direction, const Witness& w) {
  SetTransform t{w.space, interleave_image(w.space, direction),
                 [direction](const SetExprPtr& s) { return interleave_image(s, direction); }, {}, {}};
  nlohmann::json p = {{"construction", "transport"}, {"map", "interleave"}, {"direction", to_string(direction)}};
  return transform_witness(w, t, std::move(p));
}

Witness apply_transport(TransportTag tag, const Witness& w) {
  switch (tag) {
    case TransportTag::F: return binary_transport(BinaryDirection::ToCantor, w);
    case TransportTag::L: return binary_transport(BinaryDirection::ToInterval, w);
    case TransportTag::G: return interleave_transport(InterleaveDirection::Interleave, w);
    case TransportTag::GInverse: return interleave_transport(InterleaveDirection::Deinterleave, w);
    case TransportTag::T: return binary_transport(BinaryDirection::ToCantor, w, Side::Right);
    case TransportTag::TInverse: return binary_transport(BinaryDirection::ToInterval, w, Side::Right);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown transport");
}

// ---------------------------------------------------------------------------
// Rademacher functions

std::size_t RademacherVector::support() const {
  std::size_t k = a.size();
  while (k > 0 && a[k - 1] == 0) --k;
  return k;
}

Rational RademacherVector::value_on(int level, const Integer& j) const {
  std::size_t k = support();
  if (static_cast<std::size_t>(std::max(level, 0)) < k)
    throw Error(ErrorCode::InvalidArgument, "sum is not constant on dyadic intervals of level " + std::to_string(level));
  Rational v = 0;
  for (std::size_t n = 1; n <= k; ++n) {
    bool bit = mpz_tstbit(j.get_mpz_t(), static_cast<mp_bitcnt_t>(level - static_cast<int>(n))) != 0;
    v += bit ? Rational(-a[n - 1]) : a[n - 1];
  }
  return v;
}

RademacherNorm rademacher_norm(const RademacherVector& a, const Rational& p, std::size_t limit, const Rational& goal) {
  if (p <= 0) throw Error(ErrorCode::InvalidArgument, "p must be positive");
  std::size_t k = a.support();
  if (k > limit)
    throw Error(ErrorCode::SupportTooLarge,
                "support " + std::to_string(k) + " exceeds the enumeration limit " + std::to_string(limit));
  RademacherNorm out;
  out.p = p;
  if (k == 0) {
    out.pmass_exact = Rational(0);
    out.pmass = out.norm = Enclosure::exact(Rational(0));
    return out;
  }
  // |sum eps_n a_n| is unchanged by flipping every sign, so fix eps_1 = +1 and
  // walk the other 2^(k-1) patterns in Gray-code order.
  std::map<Rational, std::uint64_t> counts;
  std::vector<int> eps(k, 1);
  Rational s = 0;
  for (const auto& x : a.a) s += x;
  std::uint64_t patterns = std::uint64_t{1} << (k - 1);
  for (std::uint64_t i = 0; i < patterns; ++i) {
    if (i > 0) {
      std::size_t bit = static_cast<std::size_t>(__builtin_ctzll(i)) + 1;
      eps[bit] = -eps[bit];
      s += 2 * eps[bit] * a.a[bit];
    }
    ++counts[abs(s)];
  }
  Rational weight = Rational(1, 1) / Rational(static_cast<unsigned long>(patterns));
  if (counts.size() == 1) {
    const Rational& v = counts.begin()->first;
    ExactPosReal pm = abs_power(v, p);
    if (pm.is_rational()) out.pmass_exact = pm.scale();
    out.pmass = pm.is_rational() ? Enclosure::exact(pm.scale()) : enclose_to_width(pm, goal);
    out.norm_exact = ExactPosReal(v);
    out.norm = Enclosure::exact(v);
    return out;
  }
  if (is_integer(p)) {
    Rational total = 0;
    unsigned long e = mpz_get_ui(p.get_num_mpz_t());
    for (const auto& [v, c] : counts) total += Rational(static_cast<unsigned long>(c)) * pow_int(v, static_cast<long>(e));
    total *= weight;
    out.pmass_exact = total;
    out.pmass = Enclosure::exact(total);
    out.norm_exact = ExactPosReal::power(total, 1 / p);
    out.norm = out.norm_exact->is_rational() ? Enclosure::exact(out.norm_exact->scale())
                                             : enclose_to_width(*out.norm_exact, goal);
    return out;
  }
  Rational each = goal / (4 * Rational(static_cast<unsigned long>(counts.size())));
  Enclosure total = Enclosure::exact(Rational(0));
  for (const auto& [v, c] : counts) {
    if (v == 0) continue;
    ExactPosReal t = abs_power(v, p);
    Enclosure te = t.is_rational() ? Enclosure::exact(t.scale()) : enclose_to_width(t, each);
    total = total + Rational(static_cast<unsigned long>(c)) * weight * te;
  }
  out.pmass = total;
  int bits = 8 + static_cast<int>(std::ceil(-log2_of(goal)));
  out.norm = power_bounds(total, 1 / p, bits);
  return out;
}

std::optional<std::uint64_t> BlockCombination::nonzero_beyond(std::uint64_t level) const {
  for (std::size_t k = 1; k <= c.size() && k <= 62; ++k) {
    if (c[k - 1] == 0) continue;
    std::uint64_t unit = std::uint64_t{1} << (k - 1);
    // Least odd multiple of unit above level.
    std::uint64_t i = level / unit;
    if (i % 2 == 0) ++i;
    else i += 2;
    if (i * unit <= level) i += 2;
    return i * unit;
  }
  return std::nullopt;
}

bool nonconstancy_check(const RademacherVector& a, const DyadicInterval& I) {
  std::size_t level = static_cast<std::size_t>(std::max(I.level, 0));
  for (std::size_t n = level + 1; n <= a.a.size(); ++n)
    if (a.a[n - 1] != 0) return true;
  return false;
}

bool nonconstancy_check(const BlockCombination& v, const DyadicInterval& I) {
  return v.nonzero_beyond(static_cast<std::uint64_t>(std::max(I.level, 0))).has_value();
}

// ---------------------------------------------------------------------------
// Tensor embedding

namespace {

struct Piece {
  Integer j;
  Rational value;
};

std::vector<Piece> nonzero_pieces(const RademacherVector& a, int levels) {
  std::vector<Piece> out;
  Integer count = Integer(1) << levels;
  for (Integer j = 0; j < count; ++j) {
    Rational v = a.value_on(levels, j);
    if (v != 0) out.push_back({j, v});
  }
  return out;
}

int tensor_levels(const RademacherVector& a, std::optional<int> levels) {
  int k = static_cast<int>(a.support());
  int L = std::max(k, levels.value_or(k));
  if (L > static_cast<int>(kRademacherLimit))
    throw Error(ErrorCode::SupportTooLarge, "too many dyadic pieces for the tensor embedding");
  return L;
}

// The strand `s` on X times the constant `value` on a dyadic piece of measure
// 2^-levels: masses shrink by 2^-levels and the weight absorbs |value| and
// the renormalization, so the coefficients are exactly value times those of s.
Strand tensor_strand(const Strand& s, const Rational& value, int levels, const SetExprPtr& piece) {
  Strand out = s;
  Rational shrink = pow2(-levels);
  if (s.kind == StrandKind::GeometricP) out.B = s.B * shrink;
  else out.K = s.K * shrink;
  ExactPosReal w = s.scale * ExactPosReal(abs(value));
  if (s.normalizer) {
    Normalizer n = *s.normalizer;
    out.normalizer = Normalizer(n.p(), n.exact_part() * ExactPosReal(shrink), [n] { return n.series(); });
    w = w * ExactPosReal::power(shrink, 1 / n.p());
  }
  out.scale = w;
  if (value < 0) out.sign = -s.sign;
  Placement pl;
  pl.kind = Placement::Kind::Product;
  pl.left = std::make_shared<const Placement>(s.placement);
  pl.right = piece;
  out.placement = pl;
  out.label = s.label + "x" + piece->to_string();
  return out;
}

Enclosure scaled(const Enclosure& e, const ExactPosReal& f, const Rational& goal) {
  if (f.is_rational()) return f.scale() * e;
  return e * enclose_to_width(f, goal);
}

}  // namespace

Witness tensor_embed(const Witness& f, const RademacherVector& a, std::optional<int> levels) {
  if (a.support() == 0) throw Error(ErrorCode::ZeroVector, "Rademacher coefficients are all zero");
  bool zero_f = f.groups.empty() &&
                std::all_of(f.simple.begin(), f.simple.end(), [](const SimplePart& s) { return s.value == 0; });
  if (zero_f) throw Error(ErrorCode::ZeroVector, "the witness is the zero function");
  if (!f.norm_certified) throw Error(ErrorCode::NoTailBound, "the witness has no p-convergence certificate");
  int L = tensor_levels(a, levels);
  std::vector<Piece> pieces = nonzero_pieces(a, L);
  const Rational p = f.p;
  RademacherNorm rn = rademacher_norm(a, p);

  Witness out;
  out.space = SpaceModel::product(f.space, SpaceModel::unit_interval());
  out.p = p;
  out.kind = WitnessKind::Tensor;
  out.horizon = f.horizon;
  Rational goal = pow2(-40);
  for (const auto& g : f.groups) {
    for (const auto& pc : pieces) {
      SetExprPtr piece = dyadic(L, pc.j);
      Group t;
      t.id = g.id + "x" + pc.j.get_str();
      if (g.home) {
        auto b = base_index_of(SpaceModel::unit_interval(), *piece);
        if (b) t.home = pair(*g.home, *b);
      }
      t.support = rectangle(g.support, piece);
      t.count = g.count;
      t.select = g.select;
      auto inner = g.strand;
      Rational v = pc.value;
      t.strand = [inner, v, L, piece](std::uint64_t l) { return tensor_strand(inner(l), v, L, piece); };
      if (g.tail_pmass) {
        auto tail = g.tail_pmass;
        ExactPosReal factor = abs_power(v, p) * ExactPosReal(pow2(-L));
        t.tail_pmass = [tail, factor, goal](std::uint64_t l) { return scaled(tail(l), factor, goal); };
      }
      out.groups.push_back(std::move(t));
    }
  }
  for (const auto& s : f.simple)
    for (const auto& pc : pieces) out.simple.push_back({rectangle(s.set, dyadic(L, pc.j)), s.value * pc.value});
  out.outer_tail = f.outer_tail.hi == 0 ? f.outer_tail : f.outer_tail * rn.pmass;
  out.generic = f.generic;
  out.uniform_rule = f.uniform_rule + "; each group is split over the dyadic pieces of level " + std::to_string(L) +
                     " where the Rademacher sum is a nonzero constant";
  out.layout = layout_for(out.space, out.groups);
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& x : a.a) coeffs.push_back(x.get_str());
  out.params = {{"construction", "tensor"}, {"a", coeffs}, {"levels", L}, {"source", f.params}};
  assemble_witness(out);
  return out;
}

FubiniCheck fubini_check(const Witness& f, const Witness& tensor, std::uint64_t strands, std::uint64_t terms) {
  FubiniCheck r;
  RademacherVector a;
  for (const auto& x : tensor.params.at("a")) a.a.push_back(parse_rational(x.get<std::string>()));
  int L = tensor.params.at("levels").get<int>();
  std::vector<Piece> pieces = nonzero_pieces(a, L);
  const Rational& p = f.p;
  if (tensor.groups.size() != f.groups.size() * pieces.size()) {
    r.message = "group count differs from groups x pieces";
    return r;
  }
  // Piece factors against the sign-pattern enumeration, as multisets of |value|.
  std::map<Rational, std::uint64_t> from_pieces;
  Integer all = Integer(1) << L;
  for (Integer j = 0; j < all; ++j) ++from_pieces[abs(a.value_on(L, j))];
  std::map<Rational, std::uint64_t> from_patterns;
  std::size_t k = a.support();
  std::uint64_t repeat = std::uint64_t{1} << (L - static_cast<int>(k));
  for (std::uint64_t e = 0; e < (std::uint64_t{1} << k); ++e) {
    Rational s = 0;
    for (std::size_t n = 0; n < k; ++n) s += (e >> n & 1) ? Rational(-a.a[n]) : a.a[n];
    from_patterns[abs(s)] += repeat;
  }
  if (from_pieces != from_patterns) {
    r.message = "piece values disagree with the sign patterns";
    return r;
  }
  RademacherNorm rn = rademacher_norm(a, p);
  if (is_integer(p)) {
    Rational sum = 0;
    for (const auto& pc : pieces) sum += pow_int(abs(pc.value), mpz_get_si(p.get_num_mpz_t())) * pow2(-L);
    if (sum != *rn.pmass_exact) {
      r.message = "piece p-masses do not sum to the Rademacher p-mass";
      return r;
    }
  }
  // Term-by-term: q-mass families without the shared normalizer series.
  auto exact_term = [&p](const Strand& s, std::uint64_t m) -> std::optional<ExactPosReal> {
    MassFamily fam = q_mass_family(s, p);
    auto t = fam.term(m);
    if (!t) return std::nullopt;
    if (s.normalizer) return *t / s.normalizer->exact_part();
    return t;
  };
  for (std::size_t gi = 0; gi < f.groups.size(); ++gi) {
    const Group& g = f.groups[gi];
    std::uint64_t lim = g.count ? std::min(*g.count, strands) : strands;
    for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
      const Group& t = tensor.groups[gi * pieces.size() + pi];
      ExactPosReal factor = abs_power(pieces[pi].value, p) * ExactPosReal(pow2(-L));
      for (std::uint64_t l = 1; l <= lim; ++l) {
        Strand fs = g.strand(l);
        Strand ts = t.strand(l);
        if (measure(*ts.term_set(1)) != measure(*fs.term_set(1)) * pow2(-L)) {
          r.message = "term sets of " + t.id + " do not have product measure";
          return r;
        }
        for (std::uint64_t m = 1; m <= terms; ++m) {
          auto x = exact_term(fs, m);
          auto y = exact_term(ts, m);
          if (x.has_value() != y.has_value() || (x && !(*x * factor == *y))) {
            r.message = "term " + std::to_string(m) + " of strand " + std::to_string(l) + " in " + t.id +
                        " breaks the product identity";
            return r;
          }
          ++r.terms_checked;
        }
      }
    }
  }
  r.ok = true;
  r.message = "exact on " + std::to_string(r.terms_checked) + " terms";
  return r;
}

Witness rebuild_any(const nlohmann::json& params) {
  std::string c = params.at("construction").get<std::string>();
  if (c == "transport") {
    Witness src = rebuild_any(params.at("source"));
    std::string map = params.at("map").get<std::string>();
    std::string dir = params.at("direction").get<std::string>();
    if (map == "binary") {
      BinaryDirection d = dir == "to-cantor" ? BinaryDirection::ToCantor : BinaryDirection::ToInterval;
      std::string side = params.value("side", "all");
      Side sd = side == "left" ? Side::Left : side == "right" ? Side::Right : Side::All;
      return binary_transport(d, src, sd);
    }
    if (map == "interleave")
      return interleave_transport(dir == "interleave" ? InterleaveDirection::Interleave : InterleaveDirection::Deinterleave,
                                  src);
    throw Error(ErrorCode::ParseError, "unknown transport map '" + map + "'");
  }
  if (c == "tensor") {
    Witness src = rebuild_any(params.at("source"));
    RademacherVector a;
    for (const auto& x : params.at("a")) a.a.push_back(parse_rational(x.get<std::string>()));
    return tensor_embed(src, a, params.at("levels").get<int>());
  }
  return rebuild(params);
}

}  // namespace pforge
