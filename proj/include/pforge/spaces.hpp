#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pforge/exactnum.hpp"

namespace pforge {

enum class ModelKind { UnitInterval, HalfLine, Cantor, Counting, Product };

class SpaceModel {
 public:
  static SpaceModel unit_interval() { return SpaceModel(ModelKind::UnitInterval); }
  static SpaceModel half_line() { return SpaceModel(ModelKind::HalfLine); }
  static SpaceModel cantor() { return SpaceModel(ModelKind::Cantor); }
  static SpaceModel counting() { return SpaceModel(ModelKind::Counting); }
  static SpaceModel product(const SpaceModel& left, const SpaceModel& right);

  ModelKind kind() const { return kind_; }
  const SpaceModel& left() const;
  const SpaceModel& right() const;

  bool is_probability() const;
  bool is_atomless() const;
  bool has_infinite_measure() const;

  // unit-interval | half-line | cantor | counting | product(<a>,<b>)
  std::string name() const;
  static SpaceModel parse(std::string_view text);

  friend bool operator==(const SpaceModel& a, const SpaceModel& b);

 private:
  explicit SpaceModel(ModelKind kind) : kind_(kind) {}

  ModelKind kind_;
  std::shared_ptr<const SpaceModel> left_;
  std::shared_ptr<const SpaceModel> right_;
};

class SetExpr;
using SetExprPtr = std::shared_ptr<const SetExpr>;

// [index/2^level, (index+1)/2^level). On the half-line the index is unbounded.
struct DyadicInterval {
  int level = 0;
  Integer index = 0;
};

// All 0/1 sequences extending `stem`.
struct Cylinder {
  std::string stem;
};

// {start, ..., end-1} in the counting model.
struct IndexRange {
  Integer start = 0;
  Integer end = 0;
};

// A piece of a ledger carrier: the part of the fat Cantor set inside `host`
// that lies below the stage interval addressed by `address` (a bit string).
struct CarrierPiece {
  std::uint64_t carrier = 0;
  SetExprPtr host;
  std::string address;
};

// Coordinates along an infinite-measure region of the half-line or of the
// counting model. The region is the union of the unit blocks
// [offset + i*stride, +1), i >= 0, of an underlying line: the real half-line
// (single points in the counting model) for UnitBlocks, or the complement of
// every ledger carrier, parametrized by its own measure, for LedgerComplement.
struct RegionBase {
  enum class Kind { UnitBlocks, LedgerComplement };
  Kind kind = Kind::UnitBlocks;
  Integer offset = 0;
  Integer stride = 1;
};

// Region coordinates [lo, hi), or [lo, infinity) when unbounded.
struct RegionSlice {
  RegionBase base;
  Rational lo;
  Rational hi;
  bool unbounded = false;
};

struct Rectangle {
  SetExprPtr left;
  SetExprPtr right;
};

// Preimage of a Cantor-space set under the interleaving map.
struct Deinterleaved {
  SetExprPtr inner;
};

// Disjoint union.
struct Union {
  std::vector<SetExprPtr> children;
};

class SetExpr {
 public:
  using Node = std::variant<DyadicInterval, Cylinder, IndexRange, CarrierPiece, RegionSlice, Rectangle,
                            Deinterleaved, Union>;

  SetExpr(Node node) : node_(std::move(node)) {}  // NOLINT(google-explicit-constructor)

  const Node& node() const { return node_; }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&node_);
  }
  std::string type_name() const;
  std::string to_string() const;

 private:
  Node node_;
};

SetExprPtr make_set(SetExpr::Node node);
SetExprPtr dyadic(int level, const Integer& index);
SetExprPtr cylinder(std::string stem);
SetExprPtr rectangle(SetExprPtr left, SetExprPtr right);
SetExprPtr disjoint_union(std::vector<SetExprPtr> children);

Rational measure(const SetExpr& s);

// Real-line picture of a dyadic interval or cylinder: [lo, hi).
std::pair<Rational, Rational> interval_bounds(const SetExpr& leaf);

// Stage intervals of the fat Cantor set in [lo, lo+len): stage k keeps 2^k
// closed intervals of length len*(2^-(k+1) + 2^-(2k+1)); stage k+1 removes an
// open middle gap of length len*4^-(k+1) from each. Limit measure len/2.
std::pair<Rational, Rational> fat_cantor_stage_interval(const Rational& lo, const Rational& len,
                                                        std::string_view address);
Rational fat_cantor_gap_length(const Rational& len, std::size_t stage);

// Decidable containment. Throws IncomparableModels for mismatched leaves.
bool contains(const SetExpr& outer, const SetExpr& inner);
// Sound disjointness test (up to null sets); false means "not proven".
bool disjoint(const SetExpr& a, const SetExpr& b);
// Identical denotation of two sets as far as descriptors can tell.
bool same_set(const SetExpr& a, const SetExpr& b);

SetExprPtr enumerate_base(const SpaceModel& model, std::uint64_t n);
// Inverse of enumerate_base for π-base shaped sets.
std::optional<std::uint64_t> base_index_of(const SpaceModel& model, const SetExpr& s);

std::pair<std::uint64_t, std::uint64_t> unpair(std::uint64_t n);
std::uint64_t pair(std::uint64_t a, std::uint64_t b);

std::string stem_of(int level, const Integer& index);
std::pair<int, Integer> dyadic_of(std::string_view stem);

}  // namespace pforge
