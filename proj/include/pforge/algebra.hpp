#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pforge/exactnum.hpp"

namespace pforge {

// sum_i beta_i * prod_l x_l^k_il over generators x_l with prime values.
struct PolynomialExpr {
  struct Monomial {
    Rational coeff;
    std::vector<unsigned> exponents;
  };
  std::size_t variables = 0;
  std::vector<Monomial> monomials;

  // Grammar: term (('+'|'-') term)*, term = [coeff '*'] x<i>['^'k] ('*' x<i>['^'k])*
  // or a bare coefficient (rejected later as a constant term).
  static PolynomialExpr parse(std::string_view text, std::size_t variables);
  std::string to_string() const;
  // Throws ConstantTerm and DuplicateRows.
  void validate() const;
};

// The evaluation sum_i beta_i theta_i^j after merging equal theta and
// dropping zero coefficients, sorted by decreasing theta.
struct ExponentialSum {
  std::vector<std::pair<Rational, Integer>> terms;  // (beta_i, theta_i)

  bool is_zero() const { return terms.empty(); }
  Rational value(std::uint64_t j) const;
  // Least j >= 1 such that sum_{i>=2} |beta_i| theta_i^j < |beta_1| theta_1^j / 2
  // (and it stays so for all larger j).
  std::uint64_t dominance_threshold() const;
};

ExponentialSum evaluate_generators(const std::vector<Integer>& thetas, const PolynomialExpr& poly);

bool is_prime(const Integer& n);

}  // namespace pforge
