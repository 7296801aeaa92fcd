#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pforge/exactnum.hpp"
#include "pforge/series.hpp"
#include "pforge/spaces.hpp"

namespace pforge {

// Binary expansion map between Cantor space and the unit interval: the
// cylinder <s> corresponds to [k/2^n, (k+1)/2^n) with k the value of s.
enum class BinaryDirection { ToInterval, ToCantor };
// Interleave: Cantor x Cantor -> Cantor, (x, y) -> (x1, y1, x2, y2, ...).
enum class InterleaveDirection { Interleave, Deinterleave };
// Which factors of a product model a binary transport rewrites.
enum class Side { All, Left, Right };

// Named transports: F (interval -> Cantor), L (Cantor -> interval),
// G (Cantor x Cantor -> Cantor), G-inverse (Cantor -> Cantor x Cantor),
// T (X x interval -> X x Cantor), T-inverse.
enum class TransportTag { F, L, G, GInverse, T, TInverse };
std::string to_string(TransportTag t);
TransportTag parse_transport_tag(std::string_view s);

// Leaf rewriting. Throws UnsupportedLeaf.
SetExprPtr binary_image(const SetExprPtr& s, BinaryDirection direction);
SetExprPtr interleave_image(const SetExprPtr& s, InterleaveDirection direction);
SpaceModel binary_image(const SpaceModel& m, BinaryDirection direction, Side side = Side::All);
SpaceModel interleave_image(const SpaceModel& m, InterleaveDirection direction);

// Relabels every carrier, strand placement and simple part; coefficients,
// masses, verdicts and the norm carry over unchanged. Throws UnsupportedLeaf.
Witness binary_transport(BinaryDirection direction, const Witness& w, Side side = Side::All);
Witness interleave_transport(InterleaveDirection direction, const Witness& w);
Witness apply_transport(TransportTag tag, const Witness& w);

// Finitely supported combination of Rademacher functions r_1, ..., r_K,
// r_n(t) = sign(sin(2^n pi t)).
struct RademacherVector {
  std::vector<Rational> a;

  std::size_t support() const;
  // Value of sum a_n r_n on the dyadic interval [j/2^level, (j+1)/2^level),
  // level >= support().
  Rational value_on(int level, const Integer& j) const;
};

inline constexpr std::size_t kRademacherLimit = 20;

struct RademacherNorm {
  Rational p;
  // ||sum a_n r_n||_p^p, exact when p is an integer.
  std::optional<Rational> pmass_exact;
  Enclosure pmass;
  std::optional<ExactPosReal> norm_exact;
  Enclosure norm;
};

// Sign-pattern enumeration. Throws SupportTooLarge.
RademacherNorm rademacher_norm(const RademacherVector& a, const Rational& p, std::size_t limit = kRademacherLimit,
                               const Rational& goal = pow2(-40));

// Combination sum_k c_k v_k of unit vectors v_k with pairwise disjoint infinite
// supports: v_k lives on the indices 2^(k-1)(2i+1), i >= 0.
struct BlockCombination {
  std::vector<Rational> c;

  // Some index n > level with a nonzero coordinate, if the combination is nonzero.
  std::optional<std::uint64_t> nonzero_beyond(std::uint64_t level) const;
};

// Whether the function cannot be constant on I: some r_n with n > level(I)
// carries a nonzero coefficient.
bool nonconstancy_check(const RademacherVector& a, const DyadicInterval& I);
bool nonconstancy_check(const BlockCombination& v, const DyadicInterval& I);

// f(x) * sum a_n r_n(t) on Product(X, UnitInterval). Each group of f is split
// over the dyadic pieces of level `levels` (default: the support of a) on which
// the Rademacher sum is a nonzero constant. Throws ZeroVector.
Witness tensor_embed(const Witness& f, const RademacherVector& a, std::optional<int> levels = std::nullopt);

// Exact truncated Fubini identity: every term (group, strand l <= strands,
// index m <= terms) of the tensor carries the p-mass of the matching term of f
// times |value|^p 2^-levels, and those factors sum to ||sum a_n r_n||_p^p.
struct FubiniCheck {
  bool ok = false;
  std::uint64_t terms_checked = 0;
  std::string message;
};
FubiniCheck fubini_check(const Witness& f, const Witness& tensor, std::uint64_t strands = 3, std::uint64_t terms = 8);

// rebuild() extended with transport chains and tensor embeddings.
Witness rebuild_any(const nlohmann::json& params);

}  // namespace pforge
