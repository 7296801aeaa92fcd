#include <algorithm>
#include <cmath>
#include <sstream>

#include "pforge/error.hpp"
#include "pforge/exactnum.hpp"

namespace pforge {

namespace {

// q * 2^k for signed k.
Rational scale_pow2(const Rational& q, long k) {
  Rational r = q;
  if (k >= 0) mpq_mul_2exp(r.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(k));
  else mpq_div_2exp(r.get_mpq_t(), q.get_mpq_t(), static_cast<mp_bitcnt_t>(-k));
  return r;
}

Rational round_down(const Rational& q, long bits) {
  return scale_pow2(Rational(floor_of(scale_pow2(q, bits))), -bits);
}

Rational round_up(const Rational& q, long bits) {
  return scale_pow2(Rational(ceil_of(scale_pow2(q, bits))), -bits);
}

long ceil_log2(const Rational& q) { return static_cast<long>(std::ceil(log2_of(q) - 1e-12)); }

}  // namespace

Enclosure Enclosure::intersect(const Enclosure& other) const {
  if (!intersects(other)) throw Error(ErrorCode::InvalidArgument, "disjoint enclosures");
  Enclosure r{std::max(lo, other.lo), std::min(hi, other.hi), precision_goal};
  if (other.precision_goal != 0 && (r.precision_goal == 0 || other.precision_goal < r.precision_goal))
    r.precision_goal = other.precision_goal;
  return r;
}

std::string Enclosure::to_string() const {
  std::ostringstream os;
  os << "[" << lo.get_str() << ", " << hi.get_str() << "]";
  return os.str();
}

Enclosure operator+(const Enclosure& a, const Enclosure& b) {
  return {a.lo + b.lo, a.hi + b.hi, std::max(a.precision_goal, b.precision_goal)};
}

Enclosure operator*(const Enclosure& a, const Enclosure& b) {
  if (a.lo < 0 || b.lo < 0) throw Error(ErrorCode::InvalidArgument, "enclosure product needs non-negative operands");
  return {a.lo * b.lo, a.hi * b.hi, std::max(a.precision_goal, b.precision_goal)};
}

Enclosure operator*(const Rational& a, const Enclosure& b) {
  if (a >= 0) return {a * b.lo, a * b.hi, b.precision_goal};
  return {a * b.hi, a * b.lo, b.precision_goal};
}

Enclosure reciprocal(const Enclosure& a) {
  if (a.lo <= 0) throw Error(ErrorCode::InvalidArgument, "reciprocal of an enclosure touching zero");
  return {1 / a.hi, 1 / a.lo, a.precision_goal};
}

Enclosure root_bounds(const Rational& value, unsigned long degree, int bits) {
  if (value < 0) throw Error(ErrorCode::InvalidArgument, "root of a negative value");
  if (degree == 0) throw Error(ErrorCode::InvalidArgument, "zeroth root");
  if (value == 0 || degree == 1) return Enclosure::exact(value);
  double lg = log2_of(value) / static_cast<double>(degree);
  long k = static_cast<long>(bits) + 2 - static_cast<long>(std::floor(lg));
  Rational shifted = scale_pow2(value, k * static_cast<long>(degree));
  Integer n = floor_of(shifted);
  Integer r;
  mpz_root(r.get_mpz_t(), n.get_mpz_t(), degree);
  Rational lo = scale_pow2(Rational(r), -k);
  Integer r_pow;
  mpz_pow_ui(r_pow.get_mpz_t(), r.get_mpz_t(), degree);
  bool exact = is_integer(shifted) && r_pow == n;
  Rational hi = exact ? lo : scale_pow2(Rational(r + 1), -k);
  return {lo, hi, exact ? Rational(0) : scale_pow2(Rational(1), -bits)};
}

Enclosure rational_power_bounds(const Rational& value, const Rational& exponent, int bits) {
  if (value <= 0) throw Error(ErrorCode::InvalidArgument, "rational power of a non-positive value");
  if (!exponent.get_num().fits_slong_p() || !exponent.get_den().fits_ulong_p())
    throw Error(ErrorCode::InvalidArgument, "exponent too large");
  Rational w = pow_int(value, exponent.get_num().get_si());
  return root_bounds(w, exponent.get_den().get_ui(), bits);
}

Enclosure enclose(const ExactPosReal& x, int bits) {
  Enclosure e = Enclosure::exact(x.scale());
  if (x.factors().empty()) return e;
  int extra = 2 + static_cast<int>(std::ceil(std::log2(static_cast<double>(x.factors().size()) + 1)));
  for (const auto& f : x.factors()) e = e * rational_power_bounds(Rational(f.base), f.exponent, bits + extra);
  e.precision_goal = scale_pow2(Rational(1), -bits);
  return e;
}

Enclosure enclose_to_width(const ExactPosReal& x, const Rational& width) {
  if (x.is_rational()) return Enclosure::exact(x.scale());
  if (width <= 0) throw Error(ErrorCode::InvalidArgument, "enclosure width must be positive");
  long magnitude = static_cast<long>(std::ceil(x.log2())) + 1;
  int bits = static_cast<int>(std::max<long>(8, magnitude - ceil_log2(width) + 4));
  for (;;) {
    Enclosure e = enclose(x, bits);
    if (e.width() <= width) {
      e.precision_goal = width;
      return e;
    }
    bits += 16;
  }
}

Enclosure power_bounds(const Enclosure& e, const Rational& exponent, int bits) {
  if (e.lo < 0) throw Error(ErrorCode::InvalidArgument, "power of an enclosure with negative part");
  if (exponent == 0) return Enclosure::exact(Rational(1));
  auto endpoint = [&](const Rational& v) {
    if (v == 0) {
      if (exponent < 0) throw Error(ErrorCode::InvalidArgument, "negative power of zero");
      return Enclosure::exact(Rational(0));
    }
    return rational_power_bounds(v, exponent, bits);
  };
  Enclosure a = endpoint(e.lo);
  Enclosure b = endpoint(e.hi);
  if (exponent > 0) return {a.lo, b.hi, scale_pow2(Rational(1), -bits)};
  return {b.lo, a.hi, scale_pow2(Rational(1), -bits)};
}

namespace {

// One enclosure of the full sum with width at most 2^-level.
Enclosure enclose_sum_level(const TermGenerator& terms, long level) {
  Rational eps = scale_pow2(Rational(1), -level);
  std::uint64_t n = terms.first;
  Rational tail;
  for (;;) {
    if (terms.last && n >= *terms.last) {
      n = *terms.last;
      tail = 0;
      break;
    }
    std::optional<Rational> tb = terms.tail_bound ? terms.tail_bound(n) : std::nullopt;
    if (tb && *tb <= eps / 2) {
      tail = *tb;
      break;
    }
    if (n >= kMaxSummationCut)
      throw Error(ErrorCode::NoTailBound, "no tail bound below " + Rational(eps / 2).get_str() + " up to cut " +
                                              std::to_string(kMaxSummationCut));
    n = std::max<std::uint64_t>(n * 2, terms.first + 1);
  }
  std::uint64_t count = n >= terms.first ? n - terms.first + 1 : 0;
  long guard = level + 4 + static_cast<long>(std::ceil(std::log2(static_cast<double>(count) + 1)));
  Rational term_width = scale_pow2(Rational(1), -guard);
  Rational lo = 0;
  Rational hi = 0;
  for (std::uint64_t m = terms.first; m <= n && count > 0; ++m) {
    std::optional<ExactPosReal> t = terms.term(m);
    if (!t) continue;
    Enclosure e = enclose_to_width(*t, term_width);
    lo += round_down(e.lo, guard + 2);
    hi += round_up(e.hi, guard + 2);
  }
  hi += tail;
  return {round_down(lo, guard), round_up(hi, guard), eps};
}

}  // namespace

Enclosure enclose_sum(const TermGenerator& terms, const Rational& goal) {
  if (goal <= 0) throw Error(ErrorCode::InvalidArgument, "precision goal must be positive");
  long k_max = std::max<long>(0, static_cast<long>(std::ceil(-log2_of(goal) - 1e-12)));
  while (scale_pow2(Rational(1), -k_max) > goal) ++k_max;
  std::optional<Enclosure> result;
  for (long k = 0; k <= k_max; ++k) {
    Enclosure e = enclose_sum_level(terms, k);
    result = result ? result->intersect(e) : e;
  }
  result->precision_goal = goal;
  return *result;
}

}  // namespace pforge
