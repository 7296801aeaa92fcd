#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pforge/exactnum.hpp"
#include "pforge/spaces.hpp"

namespace pforge {

// A branch of the binary tree (finite prefix, then `period` repeated) and the
// infinite index set it selects: A = union of the harmonic blocks M_k over the
// heap indices k of the branch's finite prefixes. Blocks: n_0 = 1 and n_{k+1}
// is the least n with sum_{i=n_k}^{n-1} 1/i >= 1.
class AlmostDisjointIndex {
 public:
  AlmostDisjointIndex(std::string prefix, std::string period);
  // "prefix|period", optionally followed by "@k" to drop the blocks <= k.
  static AlmostDisjointIndex parse(std::string_view seed);

  std::string seed() const;
  // The same set without the harmonic blocks M_0..M_k.
  AlmostDisjointIndex after_block(std::uint64_t k) const;
  std::optional<std::uint64_t> cut() const { return cut_; }
  char bit(std::size_t i) const;
  std::string branch(std::size_t length) const;
  // Heap index 2^i - 1 + value(branch(i)) of the length-i prefix.
  std::uint64_t derived(std::size_t i) const;
  bool in_derived(std::uint64_t k) const;
  bool contains(std::uint64_t m) const;
  // First position where the branches differ; throws SeedCollision when equal.
  std::size_t split_point(const AlmostDisjointIndex& other) const;

  static std::uint64_t block_start(std::uint64_t k);
  static std::uint64_t block_of(std::uint64_t m);

  friend bool operator==(const AlmostDisjointIndex& a, const AlmostDisjointIndex& b);

 private:
  std::string prefix_;
  std::string period_;
  std::optional<std::uint64_t> cut_;
};

enum class StrandKind { GeometricP, FactorialDyadic };

// Where the terms of a strand live.
//   Carrier: term m sits at `base` (a carrier piece, possibly wrapped by
//   transports) with address suffix 1^(m-1)0, or 1^(e_m)0 for factorial strands.
//   Region: term m is the region slice [start + B(2^m - 2), start + B(2^(m+1) - 2)).
//   Product: term m is left(m) x right.
struct Placement {
  enum class Kind { Carrier, Region, Product };
  Kind kind = Kind::Carrier;
  SetExprPtr base;
  RegionBase region;
  Rational region_start;
  std::shared_ptr<const Placement> left;
  SetExprPtr right;
};

// Normalization by 1/||raw strand||_p, known exactly as a symbol and
// numerically as an enclosure of the raw p-mass series. The series is
// evaluated on first use and shared between copies.
class Normalizer {
 public:
  Normalizer(Rational p, ExactPosReal exact_part, std::function<Enclosure()> series);

  const Rational& p() const { return p_; }
  // raw p-mass = exact_part * series
  const ExactPosReal& exact_part() const { return exact_part_; }
  const Enclosure& series() const;
  // Enclosure of N^q = raw^(-q/p).
  Enclosure power(const Rational& q) const;

 private:
  struct Lazy;
  Rational p_;
  ExactPosReal exact_part_;
  std::shared_ptr<Lazy> lazy_;
};

// A closed-form family of weighted indicators.
//   GeometricP:      |coeff(m)| = scale * N * A * m^-alpha * delta^m, mass(m) = B * gamma^m
//   FactorialDyadic: coeff(j)   = scale * N * sum_i beta_i theta_i^j,  mass(j) = K * 2^-ceil(log2 j!)
struct Strand {
  StrandKind kind = StrandKind::GeometricP;
  ExactPosReal A;
  Rational alpha;
  ExactPosReal delta;
  Rational B;
  Rational gamma;
  std::vector<std::pair<Rational, Integer>> values;
  Rational K;
  ExactPosReal scale;
  std::optional<Normalizer> normalizer;
  int sign = 1;
  std::shared_ptr<const AlmostDisjointIndex> filter;
  Placement placement;
  std::string role;
  std::string label;

  bool admits(std::uint64_t m) const { return !filter || filter->contains(m); }
  // Signed exact coefficient for GeometricP is sign*|coeff|; for factorial
  // strands the value may be zero or negative.
  std::optional<ExactPosReal> abs_coeff(std::uint64_t m) const;  // without the normalizer
  std::optional<Rational> factorial_value(std::uint64_t j) const;
  Rational mass(std::uint64_t m) const;
  SetExprPtr term_set(std::uint64_t m) const;
  SetExprPtr support() const;
  // Family identity used to compare certificates across base indices.
  std::string family_key() const;
};

// sum_m |coeff(m)|^q mass(m) in closed form:
//   GeometricP:      C * m^-a * rho^m
//   FactorialDyadic: C * K * |sum_i beta_i theta_i^j|^q * 2^-e_j
// times an optional normalizer power N^q.
struct MassFamily {
  StrandKind kind = StrandKind::GeometricP;
  Rational q;
  ExactPosReal C;
  Rational a;
  ExactPosReal rho;
  std::vector<std::pair<Rational, Integer>> values;
  Rational K;
  std::optional<Normalizer> normalizer;
  std::shared_ptr<const AlmostDisjointIndex> filter;

  std::optional<ExactPosReal> term(std::uint64_t m) const;
  std::optional<Enclosure> factor() const;
  std::string describe() const;
};

MassFamily q_mass_family(const Strand& s, const Rational& q);
// Terms of the family (without `factor`) plus a certified tail bound when the
// family is of a convergent shape.
TermGenerator mass_terms(const MassFamily& f);
// Enclosure of the full mass series including `factor`. Throws NoTailBound
// when divergent.
Enclosure mass_enclosure(const MassFamily& f, const Rational& goal);

enum class WitnessKind { Sp, NotBelowP, SpPrime, DenseGen, AlgebraElement, Simple, Tensor };
std::string to_string(WitnessKind k);
WitnessKind parse_witness_kind(std::string_view s);

// Strands sharing an outer scale and a support, e.g. one normalized h
// function placed on the carrier of base index `home`.
struct Group {
  std::string id;
  std::optional<std::uint64_t> home;
  SetExprPtr support;
  std::function<Strand(std::uint64_t)> strand;  // l >= 1
  std::optional<std::uint64_t> count;           // nullopt: infinitely many
  // p-mass of the strands with index > L (available for normalized groups,
  // exact whenever the weights are rational).
  std::function<Enclosure(std::uint64_t)> tail_pmass;
  // Closed-form strand selection: the least l whose q-mass diverges, when the
  // construction knows it (r_l <= q or r_l >= q). Verified by a verdict.
  std::function<std::optional<std::uint64_t>(const Rational&)> select;
};

struct SimplePart {
  SetExprPtr set;
  Rational value;
};

struct Witness {
  SpaceModel space = SpaceModel::unit_interval();
  Rational p;
  WitnessKind kind = WitnessKind::Sp;
  nlohmann::json params;
  std::uint64_t horizon = 0;
  std::vector<Group> groups;
  std::vector<SimplePart> simple;
  // p-mass of groups beyond the horizon.
  Enclosure outer_tail = Enclosure::exact(Rational(0));
  std::function<std::vector<std::size_t>(std::uint64_t)> layout;
  // Strand l of the group resident at an arbitrary base index, with unit
  // outer scale. Drives the uniform certificate beyond the explicit depth.
  std::function<Strand(std::uint64_t)> generic;
  std::string uniform_rule;
  Enclosure norm;
  // False when the p-mass is too large to enclose (norm then holds [0, 0]).
  bool norm_certified = true;
  bool partial = false;

  std::vector<std::size_t> residents(std::uint64_t n) const;
};

struct AssembleOptions {
  Rational goal = pow2(-20);
  // Strands per infinite group that are checked and enclosed explicitly.
  std::uint64_t explicit_strands = 6;
};

// Validates disjointness and p-convergence of the materialized strands and
// computes the norm enclosure. Throws DisjointnessViolation, DivergentAtP.
void assemble_witness(Witness& w, const AssembleOptions& opts = {});

// Enclosure of ||w||_p^p from the strands alone (simple parts excluded).
Enclosure strands_pmass(const Witness& w, const Rational& goal, std::uint64_t explicit_strands = 6);
Enclosure strand_pmass(const Strand& s, const Rational& p, const Rational& goal);

// Strands of w whose supports lie inside U_n.
Witness restrict(const Witness& w, std::uint64_t n);

// Default enclosure goal, honouring PATHOLOGY_FORGE_PRECISION.
Rational default_goal();

}  // namespace pforge
