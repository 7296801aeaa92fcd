// Acceptance run: one line per criterion, nonzero exit on any failure.
// Divergent certificates of criterion 1 are checked against MPFR partial sums.

#include <iostream>

#include "oracle.hpp"
#include "pforge/acceptance.hpp"

using namespace pforge;

namespace {

constexpr mpfr_prec_t kPrec = 128;
constexpr unsigned long kSumLimit = 20000000;

// sum_{m <= N, m in filter} C m^-a rho^m, every step rounded down.
bool mpfr_divergence_oracle(const MassFamily& f, const Verdict& v, const Rational& threshold, std::string& why) {
  if (f.kind != StrandKind::GeometricP) {
    why = "not a geometric family";
    return false;
  }
  DivergenceIndex N = divergence_witness_index(f, v, threshold);
  oracle::Real target(kPrec), C(kPrec), a(kPrec), rho(kPrec), lnrho(kPrec), sum(kPrec), t(kPrec), u(kPrec);
  mpfr_set_q(target.get(), threshold.get_mpq_t(), MPFR_RNDU);
  mpfr_set(C.get(), oracle::value(f.C).get(), MPFR_RNDD);
  mpfr_set_q(a.get(), f.a.get_mpq_t(), MPFR_RNDN);
  mpfr_set(rho.get(), oracle::value(f.rho).get(), MPFR_RNDN);
  mpfr_log(lnrho.get(), rho.get(), MPFR_RNDD);
  bool harmonic = f.a == 1 && f.rho == ExactPosReal();

  if (N.dyadic && N.log2 > 25) {
    // sum_{m <= 2^k} 1/m > k ln 2
    if (f.filter || !harmonic) {
      why = "logarithmic bound needs an unfiltered harmonic family";
      return false;
    }
    mpfr_const_log2(t.get(), MPFR_RNDD);
    mpfr_mul_z(t.get(), t.get(), N.log2.get_mpz_t(), MPFR_RNDD);
    mpfr_mul(sum.get(), t.get(), C.get(), MPFR_RNDD);
  } else {
    if (!N.index.fits_ulong_p() || N.index.get_ui() > kSumLimit) {
      why = "predicted index " + N.index.get_str() + " too large for summation";
      return false;
    }
    for (unsigned long m = 1; m <= N.index.get_ui(); ++m) {
      if (f.filter && !f.filter->contains(m)) continue;
      if (harmonic) {
        mpfr_div_ui(t.get(), C.get(), m, MPFR_RNDD);
      } else {
        mpfr_set_ui(u.get(), m, MPFR_RNDN);
        mpfr_log(u.get(), u.get(), MPFR_RNDU);
        mpfr_mul(u.get(), u.get(), a.get(), MPFR_RNDU);
        mpfr_mul_ui(t.get(), lnrho.get(), m, MPFR_RNDD);
        mpfr_sub(t.get(), t.get(), u.get(), MPFR_RNDD);
        mpfr_exp(t.get(), t.get(), MPFR_RNDD);
        mpfr_mul(t.get(), t.get(), C.get(), MPFR_RNDD);
      }
      mpfr_add(sum.get(), sum.get(), t.get(), MPFR_RNDD);
    }
  }
  if (!mpfr_greater_p(sum.get(), target.get())) {
    why = "MPFR partial sum " + std::to_string(sum.to_double()) + " does not exceed " + threshold.get_str();
    return false;
  }
  return true;
}

}  // namespace

int main() {
  AcceptanceContext ctx;
  ctx.divergence_oracle = mpfr_divergence_oracle;
  bool ok = true;
  for (int id = 1; id <= kCriteria; ++id) {
    CriterionResult r = run_criterion(id, ctx);
    ok = ok && r.pass;
    std::cout << format_result(r) << std::endl;
  }
  return ok ? 0 : 1;
}
