#pragma once

// Reference values computed with MPFR, independent of the library's own
// rational enclosure code.

#include <mpfr.h>

#include <string>

#include "pforge/exactnum.hpp"

namespace oracle {

class Real {
 public:
  explicit Real(mpfr_prec_t prec = 256) { mpfr_init2(v_, prec); mpfr_set_ui(v_, 0, MPFR_RNDN); }
  Real(const Real& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real& operator=(const Real& o) {
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

 private:
  mpfr_t v_;
};

inline Real from_rational(const pforge::Rational& q) {
  Real r;
  mpfr_set_q(r.get(), q.get_mpq_t(), MPFR_RNDN);
  return r;
}

// base^exponent for rational base > 0 and rational exponent.
inline Real power(const pforge::Rational& base, const pforge::Rational& exponent) {
  Real b = from_rational(base);
  Real e = from_rational(exponent);
  Real r;
  mpfr_pow(r.get(), b.get(), e.get(), MPFR_RNDN);
  return r;
}

inline Real value(const pforge::ExactPosReal& x) {
  Real r = from_rational(x.scale());
  for (const auto& f : x.factors()) {
    Real t = power(pforge::Rational(f.base), f.exponent);
    mpfr_mul(r.get(), r.get(), t.get(), MPFR_RNDN);
  }
  return r;
}

// Whether the rational interval [lo, hi] contains v up to a relative slack.
inline bool encloses(const pforge::Enclosure& e, const Real& v, double slack = 1e-60) {
  Real lo = from_rational(e.lo);
  Real hi = from_rational(e.hi);
  Real s;
  mpfr_abs(s.get(), v.get(), MPFR_RNDN);
  mpfr_mul_d(s.get(), s.get(), slack, MPFR_RNDN);
  mpfr_sub(lo.get(), lo.get(), s.get(), MPFR_RNDN);
  mpfr_add(hi.get(), hi.get(), s.get(), MPFR_RNDN);
  return mpfr_lessequal_p(lo.get(), v.get()) && mpfr_lessequal_p(v.get(), hi.get());
}

// sum_{m=1}^{N} 1/m.
inline Real harmonic(unsigned long N) {
  Real s;
  Real t;
  for (unsigned long m = 1; m <= N; ++m) {
    mpfr_set_ui(t.get(), 1, MPFR_RNDN);
    mpfr_div_ui(t.get(), t.get(), m, MPFR_RNDN);
    mpfr_add(s.get(), s.get(), t.get(), MPFR_RNDN);
  }
  return s;
}

}  // namespace oracle
