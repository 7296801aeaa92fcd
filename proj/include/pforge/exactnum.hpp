#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pforge {

using Integer = mpz_class;
using Rational = mpq_class;

Rational make_rational(long num, long den = 1);
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);
std::string to_string(const Integer& z);
Rational pow_int(const Rational& base, long exponent);
Rational pow2(long exponent);
bool is_integer(const Rational& q);
Integer floor_of(const Rational& q);
Integer ceil_of(const Rational& q);
double to_double(const Rational& q);
// log2 of a positive rational, accurate to ~1e-15 relative even for huge values.
double log2_of(const Rational& q);
// Exact dyadic rational nearest below/above a double.
Rational rational_from_double(double x);

enum class Ordering { Less, Equal, Greater };

std::string_view to_string(Ordering o);

// Positive real of the form scale * prod(base_i ^ exponent_i).
//
// Canonical form: scale is a positive rational; factor bases are pairwise
// coprime integers > 1 that are not perfect powers and share no prime with
// the scale; exponents are non-integral rationals. Integral powers are always
// folded into the scale.
class ExactPosReal {
 public:
  struct Factor {
    Integer base;
    Rational exponent;
  };

  ExactPosReal();
  explicit ExactPosReal(const Rational& value);
  explicit ExactPosReal(long value) : ExactPosReal(Rational(value)) {}

  static ExactPosReal power(const Rational& base, const Rational& exponent);

  const Rational& scale() const { return scale_; }
  const std::vector<Factor>& factors() const { return factors_; }
  bool is_rational() const { return factors_.empty(); }

  ExactPosReal pow(const Rational& exponent) const;
  ExactPosReal inverse() const { return pow(Rational(-1)); }

  friend ExactPosReal operator*(const ExactPosReal& a, const ExactPosReal& b);
  friend ExactPosReal operator/(const ExactPosReal& a, const ExactPosReal& b);
  friend bool operator==(const ExactPosReal& a, const ExactPosReal& b);

  double log2() const;
  double to_double() const;

  // Canonical text `c * b1^(e1) * b2^(e2)`; the scale is omitted when it is 1
  // and there is at least one factor.
  std::string to_string() const;
  static ExactPosReal parse(std::string_view text);

 private:
  ExactPosReal(Rational scale, std::vector<Factor> factors);
  void normalize();

  Rational scale_;
  std::vector<Factor> factors_;
};

Ordering compare(const ExactPosReal& x, const ExactPosReal& y);
bool operator<(const ExactPosReal& a, const ExactPosReal& b);
bool operator>(const ExactPosReal& a, const ExactPosReal& b);
bool operator<=(const ExactPosReal& a, const ExactPosReal& b);
bool operator>=(const ExactPosReal& a, const ExactPosReal& b);
ExactPosReal pow(const ExactPosReal& x, const Rational& exponent);

// Closed interval [lo, hi] with rational endpoints. precision_goal records the
// width the producer was asked for (zero when exact).
struct Enclosure {
  Rational lo;
  Rational hi;
  Rational precision_goal;

  static Enclosure exact(const Rational& v) { return {v, v, Rational(0)}; }

  Rational width() const { return hi - lo; }
  Rational mid() const { return (lo + hi) / 2; }
  bool contains(const Rational& v) const { return lo <= v && v <= hi; }
  bool contains(const Enclosure& other) const { return lo <= other.lo && other.hi <= hi; }
  bool intersects(const Enclosure& other) const { return lo <= other.hi && other.lo <= hi; }
  Enclosure intersect(const Enclosure& other) const;
  std::string to_string() const;
};

Enclosure operator+(const Enclosure& a, const Enclosure& b);
// Products assume non-negative operands; every enclosure in this library
// bounds a non-negative quantity.
Enclosure operator*(const Enclosure& a, const Enclosure& b);
Enclosure operator*(const Rational& a, const Enclosure& b);
Enclosure reciprocal(const Enclosure& a);

// Directed-rounding bounds for value^(1/degree), relative width <= 2^-bits.
Enclosure root_bounds(const Rational& value, unsigned long degree, int bits);
// Bounds for a positive rational raised to a rational power.
Enclosure rational_power_bounds(const Rational& value, const Rational& exponent, int bits);
// Bounds of relative width <= 2^-bits (up to a small factor count multiple).
Enclosure enclose(const ExactPosReal& x, int bits);
// Bounds with absolute width <= width.
Enclosure enclose_to_width(const ExactPosReal& x, const Rational& width);
// Enclosure of e^exponent for a non-negative enclosure e.
Enclosure power_bounds(const Enclosure& e, const Rational& exponent, int bits);

// A series of positive exact terms together with the data needed to certify
// the tail. `tail_bound(N)` returns an upper bound on the sum of all terms
// with index > N, or nullopt if no bound is available at that cut.
struct TermGenerator {
  std::function<std::optional<ExactPosReal>(std::uint64_t)> term;
  std::function<std::optional<Rational>(std::uint64_t)> tail_bound;
  std::uint64_t first = 1;
  std::optional<std::uint64_t> last;
};

Enclosure enclose_sum(const TermGenerator& terms, const Rational& goal);

// Largest cut tried before enclose_sum gives up with NoTailBound.
inline constexpr std::uint64_t kMaxSummationCut = std::uint64_t{1} << 22;

}  // namespace pforge
