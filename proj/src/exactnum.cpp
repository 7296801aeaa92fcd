#include "pforge/exactnum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pforge/error.hpp"

namespace pforge {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NoTailBound: return "NoTailBound";
    case ErrorCode::IncomparableModels: return "IncomparableModels";
    case ErrorCode::DisjointnessViolation: return "DisjointnessViolation";
    case ErrorCode::DivergentAtP: return "DivergentAtP";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidRSequence: return "InvalidRSequence";
    case ErrorCode::ModelMismatch: return "ModelMismatch";
    case ErrorCode::SeedCollision: return "SeedCollision";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::ConstantTerm: return "ConstantTerm";
    case ErrorCode::DuplicateRows: return "DuplicateRows";
    case ErrorCode::UnsupportedLeaf: return "UnsupportedLeaf";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::UnclassifiableFamily: return "UnclassifiableFamily";
    case ErrorCode::MissingResident: return "MissingResident";
    case ErrorCode::OverlapDetected: return "OverlapDetected";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
  }
  return "Unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_parens(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') return trim(s.substr(1, s.size() - 2));
  return s;
}

Integer parse_integer(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty integer");
  std::size_t i = (text[0] == '-' || text[0] == '+') ? 1 : 0;
  if (i == text.size()) throw Error(ErrorCode::ParseError, "bad integer '" + std::string(text) + "'");
  for (std::size_t k = i; k < text.size(); ++k)
    if (!std::isdigit(static_cast<unsigned char>(text[k])))
      throw Error(ErrorCode::ParseError, "bad integer '" + std::string(text) + "'");
  std::string digits(text[0] == '+' ? text.substr(1) : text);
  return Integer(digits);
}

Integer pow_integer(const Integer& b, unsigned long e) {
  Integer r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

}  // namespace

Rational make_rational(long num, long den) {
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational parse_rational(std::string_view text) {
  text = strip_parens(text);
  if (auto caret = text.find('^'); caret != std::string_view::npos) {
    Rational base = parse_rational(text.substr(0, caret));
    Integer exp = parse_integer(strip_parens(text.substr(caret + 1)));
    if (!exp.fits_slong_p()) throw Error(ErrorCode::ParseError, "exponent too large");
    if (base == 0 && exp < 0) throw Error(ErrorCode::ParseError, "zero to negative power");
    return pow_int(base, exp.get_si());
  }
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Integer num = parse_integer(text.substr(0, slash));
    Integer den = parse_integer(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = text.substr(dot + 1);
    bool negative = !whole.empty() && whole[0] == '-';
    Integer w = whole.empty() || whole == "-" ? Integer(0) : parse_integer(whole);
    Integer f = frac.empty() ? Integer(0) : parse_integer(frac);
    if (f < 0) throw Error(ErrorCode::ParseError, "bad decimal");
    Rational q(f, pow_integer(Integer(10), frac.size()));
    q.canonicalize();
    Rational result = negative ? Rational(Rational(w) - q) : Rational(Rational(w) + q);
    return result;
  }
  return Rational(parse_integer(text));
}

std::string to_string(const Rational& q) { return q.get_str(); }
std::string to_string(const Integer& z) { return z.get_str(); }

Rational pow_int(const Rational& base, long exponent) {
  if (exponent == 0) return Rational(1);
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  Rational r(pow_integer(base.get_num(), e), pow_integer(base.get_den(), e));
  r.canonicalize();
  if (exponent < 0) {
    if (r == 0) throw Error(ErrorCode::InvalidArgument, "zero to a negative power");
    r = 1 / r;
  }
  return r;
}

Rational pow2(long exponent) { return pow_int(Rational(2), exponent); }

bool is_integer(const Rational& q) { return q.get_den() == 1; }

Integer floor_of(const Rational& q) {
  Integer r;
  mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Integer ceil_of(const Rational& q) {
  Integer r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

double to_double(const Rational& q) { return q.get_d(); }

double log2_of(const Rational& q) {
  if (q <= 0) throw Error(ErrorCode::InvalidArgument, "log2 of non-positive value");
  long en = 0;
  long ed = 0;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log2(mn) - std::log2(md) + static_cast<double>(en - ed);
}

Rational rational_from_double(double x) {
  mpq_class r;
  mpq_set_d(r.get_mpq_t(), x);
  return r;
}

std::string_view to_string(Ordering o) {
  switch (o) {
    case Ordering::Less: return "Less";
    case Ordering::Equal: return "Equal";
    case Ordering::Greater: return "Greater";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ExactPosReal

ExactPosReal::ExactPosReal() : scale_(1) {}

ExactPosReal::ExactPosReal(const Rational& value) : scale_(value) {
  if (scale_ <= 0) throw Error(ErrorCode::InvalidArgument, "ExactPosReal requires a positive value");
}

ExactPosReal::ExactPosReal(Rational scale, std::vector<Factor> factors)
    : scale_(std::move(scale)), factors_(std::move(factors)) {
  if (scale_ <= 0) throw Error(ErrorCode::InvalidArgument, "ExactPosReal requires a positive scale");
  normalize();
}

ExactPosReal ExactPosReal::power(const Rational& base, const Rational& exponent) {
  if (base <= 0) throw Error(ErrorCode::InvalidArgument, "power requires a positive base");
  if (is_integer(exponent) && exponent.get_num().fits_slong_p())
    return ExactPosReal(pow_int(base, exponent.get_num().get_si()));
  std::vector<Factor> f;
  f.push_back({base.get_num(), exponent});
  f.push_back({base.get_den(), -exponent});
  return ExactPosReal(Rational(1), std::move(f));
}

void ExactPosReal::normalize() {
  if (std::all_of(factors_.begin(), factors_.end(), [](const Factor& f) { return is_integer(f.exponent); })) {
    for (const auto& f : factors_) {
      if (!f.exponent.get_num().fits_slong_p()) throw Error(ErrorCode::InvalidArgument, "exponent overflow");
      scale_ *= pow_int(Rational(f.base), f.exponent.get_num().get_si());
    }
    factors_.clear();
    scale_.canonicalize();
    return;
  }
  std::vector<Factor> list;
  list.reserve(factors_.size() + 2);
  for (auto& f : factors_)
    if (f.base > 1 && f.exponent != 0) list.push_back(std::move(f));
  if (scale_.get_num() > 1) list.push_back({scale_.get_num(), Rational(1)});
  if (scale_.get_den() > 1) list.push_back({scale_.get_den(), Rational(-1)});

  auto merge = [&list] {
    std::sort(list.begin(), list.end(), [](const Factor& a, const Factor& b) { return a.base < b.base; });
    std::vector<Factor> merged;
    for (auto& f : list) {
      if (!merged.empty() && merged.back().base == f.base) {
        merged.back().exponent += f.exponent;
      } else {
        merged.push_back(std::move(f));
      }
    }
    list.clear();
    for (auto& f : merged)
      if (f.base > 1 && f.exponent != 0) list.push_back(std::move(f));
  };

  // Coprime refinement.
  bool changed = true;
  while (changed) {
    changed = false;
    merge();
    for (std::size_t i = 0; i < list.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < list.size() && !changed; ++j) {
        Integer g;
        mpz_gcd(g.get_mpz_t(), list[i].base.get_mpz_t(), list[j].base.get_mpz_t());
        if (g > 1) {
          Rational e = list[i].exponent + list[j].exponent;
          list[i].base /= g;
          list[j].base /= g;
          list.push_back({g, e});
          changed = true;
        }
      }
    }
  }

  // Primitive roots: b = r^k with k maximal.
  for (auto& f : list) {
    while (mpz_perfect_power_p(f.base.get_mpz_t())) {
      unsigned long bits = mpz_sizeinbase(f.base.get_mpz_t(), 2);
      bool reduced = false;
      for (unsigned long k = bits; k >= 2 && !reduced; --k) {
        Integer r;
        if (mpz_root(r.get_mpz_t(), f.base.get_mpz_t(), k) != 0 && r > 1) {
          f.base = r;
          f.exponent *= k;
          reduced = true;
        }
      }
      if (!reduced) break;
    }
  }
  merge();

  scale_ = 1;
  factors_.clear();
  for (auto& f : list) {
    if (is_integer(f.exponent)) {
      if (!f.exponent.get_num().fits_slong_p()) throw Error(ErrorCode::InvalidArgument, "exponent overflow");
      scale_ *= pow_int(Rational(f.base), f.exponent.get_num().get_si());
    } else {
      factors_.push_back(std::move(f));
    }
  }
  scale_.canonicalize();
}

ExactPosReal ExactPosReal::pow(const Rational& exponent) const {
  if (exponent == 0) return ExactPosReal();
  std::vector<Factor> f;
  f.reserve(factors_.size() + 2);
  for (const auto& x : factors_) f.push_back({x.base, x.exponent * exponent});
  f.push_back({scale_.get_num(), exponent});
  f.push_back({scale_.get_den(), -exponent});
  return ExactPosReal(Rational(1), std::move(f));
}

ExactPosReal operator*(const ExactPosReal& a, const ExactPosReal& b) {
  std::vector<ExactPosReal::Factor> f = a.factors_;
  f.insert(f.end(), b.factors_.begin(), b.factors_.end());
  return ExactPosReal(a.scale_ * b.scale_, std::move(f));
}

ExactPosReal operator/(const ExactPosReal& a, const ExactPosReal& b) { return a * b.inverse(); }

bool operator==(const ExactPosReal& a, const ExactPosReal& b) { return compare(a, b) == Ordering::Equal; }

double ExactPosReal::log2() const {
  double l = log2_of(scale_);
  for (const auto& f : factors_) l += f.exponent.get_d() * log2_of(Rational(f.base));
  return l;
}

double ExactPosReal::to_double() const { return std::exp2(log2()); }

std::string ExactPosReal::to_string() const {
  std::ostringstream os;
  bool first = true;
  if (scale_ != 1 || factors_.empty()) {
    os << scale_.get_str();
    first = false;
  }
  for (const auto& f : factors_) {
    if (!first) os << " * ";
    os << f.base.get_str() << "^(" << f.exponent.get_str() << ")";
    first = false;
  }
  return os.str();
}

ExactPosReal ExactPosReal::parse(std::string_view text) {
  ExactPosReal result;
  std::size_t pos = 0;
  bool any = false;
  while (pos <= text.size()) {
    std::size_t star = text.find('*', pos);
    std::string_view token = trim(text.substr(pos, star == std::string_view::npos ? text.npos : star - pos));
    if (token.empty()) throw Error(ErrorCode::ParseError, "empty factor in '" + std::string(text) + "'");
    if (auto caret = token.find('^'); caret != std::string_view::npos) {
      Rational base = parse_rational(token.substr(0, caret));
      Rational exp = parse_rational(strip_parens(token.substr(caret + 1)));
      result = result * ExactPosReal::power(base, exp);
    } else {
      result = result * ExactPosReal(parse_rational(token));
    }
    any = true;
    if (star == std::string_view::npos) break;
    pos = star + 1;
  }
  if (!any) throw Error(ErrorCode::ParseError, "empty ExactPosReal");
  return result;
}

Ordering compare(const ExactPosReal& x, const ExactPosReal& y) {
  ExactPosReal z = x / y;
  if (z.factors().empty()) {
    int c = cmp(z.scale(), Rational(1));
    return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
  }
  // Fast path: a floating estimate that is far from zero decides the sign.
  double magnitude = std::abs(log2_of(z.scale()));
  for (const auto& f : z.factors()) magnitude += std::abs(f.exponent.get_d()) * log2_of(Rational(f.base));
  double estimate = z.log2();
  double margin = 1e-9 * (1.0 + magnitude);
  if (estimate > margin) return Ordering::Greater;
  if (estimate < -margin) return Ordering::Less;

  // Exact path: raise to the lcm of the exponent denominators.
  Integer d = 1;
  for (const auto& f : z.factors()) mpz_lcm(d.get_mpz_t(), d.get_mpz_t(), f.exponent.get_den_mpz_t());
  if (!d.fits_ulong_p()) throw Error(ErrorCode::InvalidArgument, "exponent denominators too large");
  unsigned long D = d.get_ui();
  Integer lhs = pow_integer(z.scale().get_num(), D);
  Integer rhs = pow_integer(z.scale().get_den(), D);
  for (const auto& f : z.factors()) {
    Rational e = f.exponent * Rational(d);
    Integer k = e.get_num();
    if (!k.fits_slong_p()) throw Error(ErrorCode::InvalidArgument, "exponent too large");
    long ke = k.get_si();
    if (ke > 0) lhs *= pow_integer(f.base, static_cast<unsigned long>(ke));
    else rhs *= pow_integer(f.base, static_cast<unsigned long>(-ke));
  }
  int c = cmp(lhs, rhs);
  return c < 0 ? Ordering::Less : (c > 0 ? Ordering::Greater : Ordering::Equal);
}

bool operator<(const ExactPosReal& a, const ExactPosReal& b) { return compare(a, b) == Ordering::Less; }
bool operator>(const ExactPosReal& a, const ExactPosReal& b) { return compare(a, b) == Ordering::Greater; }
bool operator<=(const ExactPosReal& a, const ExactPosReal& b) { return compare(a, b) != Ordering::Greater; }
bool operator>=(const ExactPosReal& a, const ExactPosReal& b) { return compare(a, b) != Ordering::Less; }

ExactPosReal pow(const ExactPosReal& x, const Rational& exponent) { return x.pow(exponent); }

}  // namespace pforge
