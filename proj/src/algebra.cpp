#include "pforge/algebra.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "pforge/error.hpp"

namespace pforge {

namespace {

class PolyParser {
 public:
  PolyParser(std::string_view text, std::size_t variables) : s_(text), vars_(variables) {}

  PolynomialExpr run() {
    std::map<std::vector<unsigned>, Rational> merged;
    skip();
    bool first = true;
    while (i_ < s_.size()) {
      int sign = 1;
      if (s_[i_] == '+' || s_[i_] == '-') {
        sign = s_[i_] == '-' ? -1 : 1;
        ++i_;
        skip();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      auto [coeff, row] = term();
      merged[row] += sign * coeff;
      first = false;
      skip();
    }
    if (first) fail("empty polynomial");
    PolynomialExpr p;
    p.variables = vars_;
    for (auto& [row, c] : merged)
      if (c != 0) p.monomials.push_back({c, row});
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::ParseError, msg + " at offset " + std::to_string(i_) + " in '" + std::string(s_) + "'");
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  unsigned long number() {
    std::size_t start = i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
    if (start == i_) fail("expected a number");
    return std::stoul(std::string(s_.substr(start, i_ - start)));
  }

  std::pair<Rational, std::vector<unsigned>> term() {
    Rational coeff = 1;
    std::vector<unsigned> row(vars_, 0);
    while (true) {
      skip();
      if (i_ < s_.size() && s_[i_] == 'x') {
        ++i_;
        unsigned long v = number();
        if (v >= vars_) fail("variable x" + std::to_string(v) + " has no generator");
        unsigned long k = 1;
        skip();
        if (i_ < s_.size() && s_[i_] == '^') {
          ++i_;
          skip();
          k = number();
        }
        row[v] += static_cast<unsigned>(k);
      } else {
        std::size_t start = i_;
        while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '/')) ++i_;
        if (start == i_) fail("expected a coefficient or variable");
        coeff *= parse_rational(s_.substr(start, i_ - start));
      }
      skip();
      if (i_ < s_.size() && s_[i_] == '*') {
        ++i_;
        continue;
      }
      return {coeff, row};
    }
  }

  std::string_view s_;
  std::size_t vars_;
  std::size_t i_ = 0;
};

}  // namespace

PolynomialExpr PolynomialExpr::parse(std::string_view text, std::size_t variables) {
  return PolyParser(text, variables).run();
}

std::string PolynomialExpr::to_string() const {
  if (monomials.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    const auto& m = monomials[i];
    Rational c = m.coeff;
    if (i == 0) {
      if (c < 0) os << "-";
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    Rational a = abs(c);
    bool any_var = std::any_of(m.exponents.begin(), m.exponents.end(), [](unsigned k) { return k > 0; });
    bool wrote = false;
    if (a != 1 || !any_var) {
      os << a.get_str();
      wrote = true;
    }
    for (std::size_t v = 0; v < m.exponents.size(); ++v) {
      if (m.exponents[v] == 0) continue;
      os << (wrote ? "*" : "") << "x" << v;
      if (m.exponents[v] > 1) os << "^" << m.exponents[v];
      wrote = true;
    }
  }
  return os.str();
}

void PolynomialExpr::validate() const {
  for (std::size_t i = 0; i < monomials.size(); ++i) {
    const auto& row = monomials[i].exponents;
    if (row.size() != variables) throw Error(ErrorCode::InvalidArgument, "exponent row has the wrong length");
    if (std::all_of(row.begin(), row.end(), [](unsigned k) { return k == 0; }))
      throw Error(ErrorCode::ConstantTerm, "monomial " + std::to_string(i) + " is constant");
    for (std::size_t j = 0; j < i; ++j)
      if (monomials[j].exponents == row)
        throw Error(ErrorCode::DuplicateRows, "monomials " + std::to_string(j) + " and " + std::to_string(i) +
                                                  " share an exponent row");
  }
}

Rational ExponentialSum::value(std::uint64_t j) const {
  Rational v = 0;
  for (const auto& [beta, theta] : terms) {
    Integer t;
    mpz_pow_ui(t.get_mpz_t(), theta.get_mpz_t(), j);
    v += beta * Rational(t);
  }
  return v;
}

std::uint64_t ExponentialSum::dominance_threshold() const {
  if (terms.empty()) throw Error(ErrorCode::AllZero, "zero sum has no dominant term");
  const auto& [beta1, theta1] = terms.front();
  // The ratio sum_{i>=2} |beta_i| (theta_i/theta_1)^j decreases in j, so the
  // first index that satisfies the inequality works for all later ones.
  for (std::uint64_t j = 1;; ++j) {
    Rational rest = 0;
    for (std::size_t i = 1; i < terms.size(); ++i) {
      Integer t;
      mpz_pow_ui(t.get_mpz_t(), terms[i].second.get_mpz_t(), j);
      rest += abs(terms[i].first) * Rational(t);
    }
    Integer lead;
    mpz_pow_ui(lead.get_mpz_t(), theta1.get_mpz_t(), j);
    if (rest * 2 < abs(beta1) * Rational(lead)) return j;
  }
}

ExponentialSum evaluate_generators(const std::vector<Integer>& thetas, const PolynomialExpr& poly) {
  poly.validate();
  if (thetas.size() != poly.variables) throw Error(ErrorCode::InvalidArgument, "one generator per variable");
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    if (!is_prime(thetas[i])) throw Error(ErrorCode::InvalidArgument, "generator " + thetas[i].get_str() + " is not prime");
    for (std::size_t j = 0; j < i; ++j)
      if (thetas[i] == thetas[j]) throw Error(ErrorCode::InvalidArgument, "generators must be distinct");
  }
  std::map<Integer, Rational> merged;
  for (const auto& m : poly.monomials) {
    Integer theta = 1;
    for (std::size_t v = 0; v < thetas.size(); ++v) {
      Integer t;
      mpz_pow_ui(t.get_mpz_t(), thetas[v].get_mpz_t(), m.exponents[v]);
      theta *= t;
    }
    merged[theta] += m.coeff;
  }
  ExponentialSum es;
  for (auto it = merged.rbegin(); it != merged.rend(); ++it)
    if (it->second != 0) es.terms.emplace_back(it->second, it->first);
  return es;
}

bool is_prime(const Integer& n) { return n >= 2 && mpz_probab_prime_p(n.get_mpz_t(), 40) > 0; }

}  // namespace pforge
