#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pforge/algebra.hpp"
#include "pforge/certify.hpp"
#include "pforge/ledger.hpp"
#include "pforge/series.hpp"

namespace pforge {

// Exponents r_1, r_2, ... moving strictly monotonically towards p: an explicit
// prefix, then p + offset/l (decreasing) or p - offset/l (increasing).
struct RSequence {
  enum class Direction { Decreasing, Increasing };
  Rational p;
  Direction direction = Direction::Decreasing;
  Rational offset = 1;
  std::vector<Rational> prefix;

  static RSequence decreasing_default(const Rational& p);  // p + 1/l
  static RSequence increasing_default(const Rational& p);  // p - p/(2l)

  Rational at(std::uint64_t l) const;
  // Least l with r_l <= q (decreasing) or r_l >= q (increasing).
  std::optional<std::uint64_t> first_reaching(const Rational& q) const;
  // Throws InvalidRSequence.
  void validate() const;
  nlohmann::json to_json() const;
  static RSequence from_json(const nlohmann::json& j, const Rational& p, Direction direction);
};

struct BuildOptions {
  std::uint64_t horizon = 30;
  // Goal for the raw strand sums behind each normalizer.
  Rational normalizer_goal = pow2(-34);
  AssembleOptions assemble;
};

enum class BasicMode { Sp, SpPrime };

// Norm-one function spread over every base index: group n (0 <= n <= horizon)
// sits on a fresh carrier inside U_n with weight 2^(-(n+1)/p); its strand l is
// the normalized h function for exponent r_l with weight 2^(-l/p).
Witness build_hA(const SpaceModel& space, const Rational& p, const std::optional<RSequence>& r = std::nullopt,
                 const BuildOptions& opts = {});

// Norm-one function in L^p outside every L^q, q < p, on an infinite-measure
// model (half-line or counting). Strand l lives on its own arithmetic
// progression of unit blocks with doubling masses.
Witness build_gB(const SpaceModel& space, const Rational& p, const std::optional<RSequence>& r = std::nullopt,
                 const BuildOptions& opts = {});

// M witnesses on pairwise disjoint carriers sharing one ledger. SpPrime
// (half-line only) weights the f part by 2^(-1/p) and adds a g part of the
// same weight on the member's own progression of the carrier complement, so
// both halves carry p-mass 1/2. Throws ModelMismatch.
std::vector<Witness> build_basic_family(const SpaceModel& space, const Rational& p, std::size_t count,
                                        BasicMode mode, const std::optional<RSequence>& r = std::nullopt,
                                        const BuildOptions& opts = {});

struct DensePair {
  SetExprPtr set;
  std::uint64_t n = 1;
  AlmostDisjointIndex seed;
};

// g = indicator(set) + f^seed / n, where f^seed keeps only the inner indices
// in the seed's index set. All generators share one carrier layout.
// Throws SeedCollision.
std::vector<Witness> build_dense_generators(const SpaceModel& space, const Rational& p,
                                            const std::vector<DensePair>& pairs, const BuildOptions& opts = {});

// ||g - indicator(set)||_p for a dense generator.
Enclosure dense_deviation_norm(const Witness& g, const Rational& goal = pow2(-20));

// Certifies membership of a nontrivial combination. Throws AllZero,
// SeedCollision.
struct DenseCombinationReport {
  Report report;
  // Last harmonic block shared by two of the seeds; tails after it are disjoint.
  std::uint64_t cut_block = 0;
  std::optional<std::uint64_t> cut_index;
  std::vector<Report> per_exponent;
  // The witness the per-exponent reports were computed on.
  Witness tail;
};
DenseCombinationReport dense_combination_certify(const std::vector<std::pair<Rational, const Witness*>>& combo,
                                                 std::uint64_t depth = 10,
                                                 const std::vector<Rational>& exponents = {});

// Largest theta_1^p for which an algebra element's norm is enclosed.
inline constexpr unsigned long kAlgebraNormGrowth = 64;

// Evaluation of P at generators with values theta^j on B_j. The zero
// polynomial yields the zero witness. Throws ConstantTerm, DuplicateRows.
Witness algebra_generator_eval(const std::vector<Integer>& thetas, const PolynomialExpr& poly, const Rational& p,
                               const SpaceModel& space = SpaceModel::unit_interval(), const BuildOptions& opts = {});

// Finite sum of value * indicator(set) over pairwise disjoint sets.
Witness build_simple(const SpaceModel& space, const Rational& p, std::vector<SimplePart> parts);

// JSON form of the plain sets used as simple parts: dyadic intervals,
// cylinders and index ranges.
nlohmann::json set_to_json(const SetExpr& s);
SetExprPtr set_from_json(const nlohmann::json& j);

// Regenerates a witness from the `params` it was built with.
Witness rebuild(const nlohmann::json& params);

}  // namespace pforge
