#include "pforge/ledger.hpp"

#include <algorithm>
#include <deque>
#include <mutex>

#include "pforge/error.hpp"

namespace pforge {

Rational dyadic_floor(const Rational& x) {
  if (x <= 0) throw Error(ErrorCode::InvalidArgument, "dyadic_floor needs a positive value");
  long k = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 2));
  Rational p = pow2(k);
  while (p > x) p /= 2;
  while (p * 2 <= x) p *= 2;
  return p;
}

std::uint64_t ceil_log2_factorial(std::uint64_t j) {
  // Memoized; j! is extended one factor at a time.
  static std::mutex mu;
  static std::vector<std::uint64_t> table{0, 0};
  static Integer fact = 1;
  std::lock_guard<std::mutex> lock(mu);
  while (table.size() <= j) {
    fact *= static_cast<unsigned long>(table.size());
    Integer fm = fact - 1;
    table.push_back(mpz_sizeinbase(fm.get_mpz_t(), 2));
  }
  return table[j];
}

std::vector<Rational> geometric_blocks(const Rational& total, const std::function<Rational(std::uint64_t)>& ratio,
                                       std::size_t count) {
  if (total <= 0) throw Error(ErrorCode::InvalidArgument, "region mass must be positive");
  std::vector<Rational> out;
  if (count == 0) return out;
  out.push_back(dyadic_floor(total / 4));
  for (std::size_t n = 1; n < count; ++n) {
    Rational a = ratio(n);
    if (a <= 0) throw Error(ErrorCode::InvalidArgument, "block ratios must be positive");
    out.push_back(dyadic_floor(std::min<Rational>(a, Rational(1, 2)) * out.back()));
  }
  return out;
}

Rational FatCantor::removed_through(std::size_t stage) const {
  // sum_{t=1..stage} 2^(t-1) * len * 2^(-2t-c) = len * 2^(-c-1) * (1 - 2^-stage)
  return len * pow2(-c - 1) * (1 - pow2(-static_cast<long>(stage)));
}

Rational FatCantor::limit_measure() const { return len * (1 - pow2(-c - 1)); }

std::vector<std::pair<Rational, Rational>> FatCantor::intervals(std::size_t stage) const {
  std::vector<std::pair<Rational, Rational>> cur{{lo, lo + len}};
  for (std::size_t t = 1; t <= stage; ++t) {
    Rational gap = len * pow2(-2 * static_cast<long>(t) - c);
    std::vector<std::pair<Rational, Rational>> next;
    next.reserve(cur.size() * 2);
    for (const auto& [a, b] : cur) {
      Rational piece = (b - a - gap) / 2;
      next.emplace_back(a, a + piece);
      next.emplace_back(b - piece, b);
    }
    cur = std::move(next);
  }
  return cur;
}

FatCantor nowhere_dense_subset(const DyadicInterval& u, const Rational& epsilon) {
  if (epsilon <= 0 || epsilon >= 1) throw Error(ErrorCode::InvalidArgument, "epsilon must lie in (0,1)");
  int c = 0;
  while (pow2(-c - 1) >= 1 - epsilon) ++c;
  Rational len = pow2(-u.level);
  return FatCantor{Rational(u.index) * len, len, c};
}

// ---------------------------------------------------------------------------

CarrierLedger::CarrierLedger(SpaceModel model) : model_(std::move(model)) {
  if (model_.kind() != ModelKind::UnitInterval && model_.kind() != ModelKind::HalfLine &&
      model_.kind() != ModelKind::Cantor)
    throw Error(ErrorCode::ModelMismatch, "carrier ledger needs an atomless interval-like model, got " + model_.name());
}

SetExprPtr CarrierLedger::child(const SetExprPtr& s, int bit) const {
  if (const auto* d = s->as<DyadicInterval>()) return dyadic(d->level + 1, d->index * 2 + bit);
  if (const auto* c = s->as<Cylinder>()) return cylinder(c->stem + (bit ? "1" : "0"));
  throw Error(ErrorCode::UnsupportedLeaf, "cannot split " + s->type_name());
}

namespace {

int level_of(const SetExpr& s) {
  if (const auto* d = s.as<DyadicInterval>()) return d->level;
  if (const auto* c = s.as<Cylinder>()) return static_cast<int>(c->stem.size());
  throw Error(ErrorCode::UnsupportedLeaf, "no level for " + s.type_name());
}

SetExprPtr like(const SetExpr& shape, int level, const Integer& index) {
  if (shape.as<Cylinder>()) return cylinder(stem_of(level, index));
  return dyadic(level, index);
}

// Largest dyadic interval of level >= min_level inside [x, y).
std::optional<std::pair<int, Integer>> largest_dyadic_inside(const Rational& x, const Rational& y, int min_level) {
  for (int level = min_level; level < min_level + 512; ++level) {
    Rational scale = pow2(level);
    Integer start = ceil_of(x * scale);
    if (Rational(start + 1) / scale <= y) return std::make_pair(level, start);
  }
  return std::nullopt;
}

// A dyadic subinterval of w lying in a gap of the fat Cantor set in host.
SetExprPtr gap_subinterval(const SetExprPtr& host, const SetExprPtr& w) {
  auto [a, b] = interval_bounds(*w);
  auto [hlo, hhi] = interval_bounds(*host);
  Rational len = hhi - hlo;
  std::deque<std::string> queue{""};
  while (!queue.empty()) {
    std::string s = queue.front();
    queue.pop_front();
    auto [c, d] = fat_cantor_stage_interval(hlo, len, s);
    if (d <= a || c >= b) continue;
    auto [c0, d0] = fat_cantor_stage_interval(hlo, len, s + "0");
    auto [c1, d1] = fat_cantor_stage_interval(hlo, len, s + "1");
    Rational x = std::max(a, d0);
    Rational y = std::min(b, c1);
    if (x < y) {
      auto found = largest_dyadic_inside(x, y, level_of(*w));
      if (found) return like(*w, found->first, found->second);
    }
    if (s.size() > 400) break;
    queue.push_back(s + "0");
    queue.push_back(s + "1");
  }
  throw Error(ErrorCode::DisjointnessViolation, "no free gap found inside " + w->to_string());
}

}  // namespace

SetExprPtr CarrierLedger::free_subinterval(std::uint64_t n) const {
  SetExprPtr w = enumerate_base(model_, n);
  for (const auto& rec : carriers_) {
    if (disjoint(*rec.host, *w)) continue;
    if (contains(*w, *rec.host) && !contains(*rec.host, *w)) {
      SetExprPtr left = child(w, 0);
      w = contains(*left, *rec.host) ? child(w, 1) : left;
      continue;
    }
    if (disjoint(*whole(rec.id), *w)) continue;
    w = gap_subinterval(rec.host, w);
  }
  return w;
}

const CarrierRecord& CarrierLedger::allocate_carrier(std::uint64_t n, const Rational& mass) {
  SetExprPtr u = enumerate_base(model_, n);
  if (mass <= 0 || dyadic_floor(mass) != mass)
    throw Error(ErrorCode::InvalidArgument, "carrier mass must be a positive dyadic rational");
  if (mass > measure(*u) / 2)
    throw Error(ErrorCode::BudgetExceeded,
                "mass " + mass.get_str() + " exceeds half of measure(U_" + std::to_string(n) + ")");
  SetExprPtr w = free_subinterval(n);
  if (mass * 2 > measure(*w))
    throw Error(ErrorCode::BudgetExceeded,
                "free space " + w->to_string() + " in U_" + std::to_string(n) + " cannot host mass " + mass.get_str());
  CarrierRecord rec;
  rec.id = carriers_.size();
  rec.base_index = n;
  rec.mass = mass;
  SetExprPtr host = w;
  while (measure(*host) > mass * 2) {
    rec.reserved.push_back(child(host, 1));
    host = child(host, 0);
  }
  rec.host = host;
  registry_.insert(registry_.end(), rec.reserved.begin(), rec.reserved.end());
  carriers_.push_back(std::move(rec));
  return carriers_.back();
}

const CarrierRecord& CarrierLedger::allocate_within(std::uint64_t n, const Rational& cap) {
  SetExprPtr w = free_subinterval(n);
  Rational mass = std::min<Rational>(dyadic_floor(cap), measure(*w) / 4);
  return allocate_carrier(n, mass);
}

SetExprPtr CarrierLedger::piece(std::uint64_t carrier, std::string address) const {
  if (carrier >= carriers_.size()) throw Error(ErrorCode::InvalidArgument, "unknown carrier " + std::to_string(carrier));
  return make_set(CarrierPiece{carrier, carriers_[carrier].host, std::move(address)});
}

void CarrierLedger::verify() const {
  for (const auto& rec : carriers_) {
    if (!contains(*enumerate_base(model_, rec.base_index), *rec.host))
      throw Error(ErrorCode::DisjointnessViolation, "carrier " + std::to_string(rec.id) + " escapes its base element");
    if (measure(*whole(rec.id)) != rec.mass)
      throw Error(ErrorCode::DisjointnessViolation, "carrier " + std::to_string(rec.id) + " has the wrong mass");
    for (std::uint64_t j = 0; j < rec.id; ++j)
      if (!disjoint(*whole(rec.id), *whole(j)))
        throw Error(ErrorCode::DisjointnessViolation,
                    "carriers " + std::to_string(j) + " and " + std::to_string(rec.id) + " overlap");
  }
}

}  // namespace pforge
