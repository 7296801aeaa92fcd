#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "pforge/spaces.hpp"

namespace pforge {

// One allocation: a fat Cantor set (limit measure mass = measure(host)/2)
// living inside `host`, which sits inside the π-base element `base_index`.
struct CarrierRecord {
  std::uint64_t id = 0;
  std::uint64_t base_index = 0;
  SetExprPtr host;
  Rational mass;
  std::vector<SetExprPtr> reserved;
};

// Deterministic allocator of pairwise disjoint, nowhere dense carriers.
// Supports the unit interval, the half-line and Cantor space.
class CarrierLedger {
 public:
  explicit CarrierLedger(SpaceModel model);

  const SpaceModel& model() const { return model_; }
  const std::vector<CarrierRecord>& carriers() const { return carriers_; }
  // Intervals set aside by allocations; never handed out to the allocation
  // that reserved them.
  const std::vector<SetExprPtr>& registry() const { return registry_; }

  // A dyadic interval (or cylinder) inside U_n that misses every carrier.
  SetExprPtr free_subinterval(std::uint64_t n) const;

  // Throws BudgetExceeded when mass > measure(U_n)/2 or the free space found
  // in U_n cannot host it.
  const CarrierRecord& allocate_carrier(std::uint64_t n, const Rational& mass);
  // Allocates min(cap, measure(free space)/4).
  const CarrierRecord& allocate_within(std::uint64_t n, const Rational& cap);

  SetExprPtr piece(std::uint64_t carrier, std::string address) const;
  SetExprPtr whole(std::uint64_t carrier) const { return piece(carrier, ""); }

  // Re-checks pairwise disjointness and containment of every allocation.
  // Throws DisjointnessViolation.
  void verify() const;

 private:
  SetExprPtr child(const SetExprPtr& s, int bit) const;

  SpaceModel model_;
  std::vector<CarrierRecord> carriers_;
  std::vector<SetExprPtr> registry_;
};

// Largest power of two not exceeding x > 0.
Rational dyadic_floor(const Rational& x);
// ceil(log2(j!)), j >= 1.
std::uint64_t ceil_log2_factorial(std::uint64_t j);

// Dyadic masses mu_1, mu_2, ... with mu_{n+1} <= a_n mu_n and sum < M.
std::vector<Rational> geometric_blocks(const Rational& total, const std::function<Rational(std::uint64_t)>& ratio,
                                       std::size_t count);

// Staged fat Cantor set inside [lo, lo+len): stage t removes an open middle
// gap of length len * 2^(-2t-c) from each of the 2^(t-1) stage intervals.
struct FatCantor {
  Rational lo;
  Rational len;
  int c = 0;

  Rational removed_through(std::size_t stage) const;
  Rational measure_at(std::size_t stage) const { return len - removed_through(stage); }
  Rational limit_measure() const;
  std::vector<std::pair<Rational, Rational>> intervals(std::size_t stage) const;
};

FatCantor nowhere_dense_subset(const DyadicInterval& u, const Rational& epsilon);

}  // namespace pforge
