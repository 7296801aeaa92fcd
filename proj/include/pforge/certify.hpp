#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pforge/algebra.hpp"
#include "pforge/series.hpp"

namespace pforge {

enum class CertType { RatioTest, GeometricGrowth, PSeries, HarmonicComparison, FactorialRatio, UnboundedValues };
std::string to_string(CertType t);

// Exact data from which a verdict is mechanically re-derived.
//   RatioTest{rho, from_index}: t_{m+1} <= rho t_m for m >= from_index, rho < 1.
//   GeometricGrowth{rho, from_index}: t_{m+1} >= sqrt(rho) t_m for m >= from_index, rho > 1.
//   PSeries{exponent > 1, constant}: t_m = constant * m^-exponent.
//   HarmonicComparison{exponent <= 1, constant}: t_m >= constant / m on the
//     admitted indices; with a block filter every admitted block sums to >= 1.
//   FactorialRatio{growth, value_bound, from_index}: t_j <= value_bound * growth^j / j!
//     and growth / (j+1) <= 1/2 for j >= from_index.
//   UnboundedValues{beta1, theta1, j0}: |value_j| > |beta1| theta1^j / 2 for j >= j0.
struct Certificate {
  CertType type = CertType::RatioTest;
  ExactPosReal rho;
  std::uint64_t from_index = 1;
  std::uint64_t crossover = 0;
  Rational exponent;
  ExactPosReal constant;
  std::string filter_seed;
  ExactPosReal growth;
  ExactPosReal value_bound;
  Rational beta1;
  Integer theta1 = 0;
  std::uint64_t j0 = 0;

  nlohmann::json to_json() const;
};

struct Verdict {
  bool converges = false;
  std::optional<Enclosure> bound;
  Certificate cert;

  std::string name() const { return converges ? "Converges" : "Diverges"; }
  nlohmann::json to_json() const;
};

// Decides the closed-form families emitted by the constructions.
// Throws UnclassifiableFamily.
Verdict series_verdict(const MassFamily& f, bool with_bound = true, const Rational& goal = pow2(-20));

// Independent re-derivation of a verdict from its certificate.
struct Replay {
  bool ok = false;
  std::string message;
};
Replay replay(const MassFamily& f, const Verdict& v);

// An index N at which partial sums provably exceed `threshold` for a divergent
// verdict. Unfiltered harmonic families give N = 2^log2, which may be far too
// large to write out; `index` is then filled only when log2 <= 2^16.
struct DivergenceIndex {
  bool dyadic = false;
  Integer log2;
  Integer index;
};
DivergenceIndex divergence_witness_index(const MassFamily& f, const Verdict& v, const Rational& threshold);

struct Target {
  enum class Kind { Lq, Linf };
  Kind kind = Kind::Lq;
  Rational q;

  std::string claim() const;
};

struct BaseVerdict {
  std::uint64_t n = 0;
  std::string group;
  std::uint64_t strand = 0;
  std::string family;
  Verdict verdict;
};

struct Report {
  std::string witness_hash;
  std::string claim;
  std::uint64_t depth = 0;
  bool uniform = false;
  bool granted = false;
  std::string reason;
  std::string uniform_rule;
  std::uint64_t uniform_through = 0;
  std::vector<BaseVerdict> verdicts;
  double seconds = 0;

  nlohmann::json to_json(bool include_timing = false) const;
};

// Divergence over every π-base element with index <= depth, plus the
// construction's uniform rule for all indices up to 2^(depth+1) - 2.
Report nowhere_report(const Witness& w, const Target& target, std::uint64_t depth);

// p-convergence of every materialized strand.
Report p_report(const Witness& w);

// Global divergence at q (not restricted to base elements).
Report global_divergence_report(const Witness& w, const Rational& q);

struct IsometryResult {
  Enclosure pmass;
  Rational target;
  Rational tolerance;
  bool within = false;
};

// Throws OverlapDetected.
IsometryResult isometry_check(const std::vector<Witness>& family, const std::vector<Rational>& coeffs,
                              const Rational& p);

struct FreenessResult {
  bool zero = false;
  std::uint64_t j0 = 0;
  Rational beta1;
  Integer theta1 = 0;
};

FreenessResult freeness_check(const std::vector<Integer>& thetas, const PolynomialExpr& poly);

// Strand index selected for exponent q: least l whose family diverges at q.
std::optional<std::uint64_t> select_strand(const Group& g, const Rational& q, std::uint64_t limit = 4096);

// Boundedness of a strand's coefficients: Diverges means unbounded
// (UnboundedValues or GeometricGrowth on the coefficients).
Verdict sup_verdict(const Strand& s);

}  // namespace pforge
