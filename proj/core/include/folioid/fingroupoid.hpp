#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "folioid/report.hpp"

namespace folioid {

/// Sorted set of arrow ids.
using ArrowSet = std::vector<int>;

/// Finite groupoid with arrows 0..num_arrows-1 over objects 0..num_objects-1.
/// Multiplication is defined exactly on composable pairs (src(g) == tgt(h)).
class FiniteGroupoid {
 public:
  FiniteGroupoid() = default;
  /// Throws StructuralError on ids out of range, duplicate entries, entries on
  /// non-composable pairs or composable pairs without an entry.
  FiniteGroupoid(int num_objects, std::vector<int> src, std::vector<int> tgt,
                 std::vector<int> unit, std::vector<int> inv,
                 const std::vector<std::array<int, 3>>& mul_table,
                 std::vector<std::string> object_names = {},
                 std::vector<std::string> arrow_names = {});

  int num_objects() const { return num_objects_; }
  int num_arrows() const { return static_cast<int>(src_.size()); }

  int src(int g) const { return src_.at(g); }
  int tgt(int g) const { return tgt_.at(g); }
  int unit(int p) const { return unit_.at(p); }
  int inv(int g) const { return inv_.at(g); }
  bool composable(int g, int h) const { return src(g) == tgt(h); }
  /// g * h; throws NotComposable when src(g) != tgt(h).
  int mul(int g, int h) const;
  std::optional<int> find_mul(int g, int h) const;
  bool is_unit(int g) const { return unit(src(g)) == g && src(g) == tgt(g); }

  const std::vector<int>& src_table() const { return src_; }
  const std::vector<int>& tgt_table() const { return tgt_; }
  const std::vector<int>& unit_table() const { return unit_; }
  const std::vector<int>& inv_table() const { return inv_; }
  /// All (g, h, gh) entries sorted by (g, h).
  std::vector<std::array<int, 3>> mul_entries() const;

  const std::vector<std::string>& object_names() const { return object_names_; }
  const std::vector<std::string>& arrow_names() const { return arrow_names_; }

  /// Arrows from q to p, i.e. with tgt == p and src == q.
  std::vector<int> hom(int p, int q) const;

  /// Copy with the inverse table replaced (used for fault injection).
  FiniteGroupoid with_inverse(std::vector<int> inv) const;

 private:
  static std::uint64_t key(int g, int h) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(g)) << 32) |
           static_cast<std::uint32_t>(h);
  }

  int num_objects_ = 0;
  std::vector<int> src_, tgt_, unit_, inv_;
  std::unordered_map<std::uint64_t, int> mul_;
  std::vector<std::string> object_names_, arrow_names_;
};

/// Pair groupoid on n objects; arrow (i, j) has target i, source j and id i*n + j.
FiniteGroupoid pair_groupoid(int n);
/// Cyclic group Z/n as a one-object groupoid; arrow k is the residue k.
FiniteGroupoid cyclic_group(int n);
/// Units only.
FiniteGroupoid discrete_groupoid(int n);
/// Cartesian product; arrow (a, b) has id a * |B| + b, object (p, q) has id p * |P_B| + q.
FiniteGroupoid product(const FiniteGroupoid& a, const FiniteGroupoid& b);

Json to_json(const FiniteGroupoid& g);
/// Accepts `objects`/`arrows` either as counts or as arrays of names.
FiniteGroupoid groupoid_from_json(const Json& j);

/// Exhaustive check of the groupoid axioms and their cancellation consequences.
ValidationReport validate_groupoid(const FiniteGroupoid& g);

struct FiniteMorphism {
  FiniteGroupoid source;
  FiniteGroupoid target;
  std::vector<int> arrow_map;
  std::vector<int> object_map;
};

/// Checks s'F = f s, t'F = f t, F(gh) = F(g)F(h) and F(1_p) = 1_{f(p)}.
ValidationReport validate_morphism(const FiniteMorphism& f);

struct NormalityResult {
  bool normal = true;
  std::optional<Json> witness;
};

/// Throws PreconditionError when n is not a wide subgroupoid.
void require_wide_subgroupoid(const FiniteGroupoid& g, const ArrowSet& n);
NormalityResult is_normal_subgroupoid(const FiniteGroupoid& g, const ArrowSet& n);

struct FiniteQuotient {
  FiniteGroupoid quotient;
  FiniteMorphism projection;
};

/// G/~ over P/~o for a normal subgroupoid N.
FiniteQuotient quotient_by_normal_subgroupoid(const FiniteGroupoid& g, const ArrowSet& n);

/// Arrows mapped to units. Throws ConsistencyError if the result is not normal.
ArrowSet kernel_of_morphism(const FiniteMorphism& f);

/// theta is keyed on (p, q, g) with tgt(g) == q and gives an arrow h whose coset
/// is theta((p, q), gN). Any representative of a coset may appear as key.
struct NormalSubgroupoidSystem {
  ArrowSet n;
  std::vector<std::pair<int, int>> relation;
  std::map<std::tuple<int, int, int>, int> theta;
};

/// Coset id of every arrow for g ~ g n; ids are numbered by first arrow.
std::vector<int> left_cosets(const FiniteGroupoid& g, const ArrowSet& n);

/// Tabulates theta from a rule evaluated on every (p, q) in the relation and
/// every arrow with target q.
NormalSubgroupoidSystem make_nss(const FiniteGroupoid& g, ArrowSet n,
                                 std::vector<std::pair<int, int>> relation,
                                 const std::function<int(int, int, int)>& theta_rule);

/// The system (K, R(f), theta) induced by a morphism.
NormalSubgroupoidSystem kernel_system(const FiniteMorphism& f);

Json to_json(const NormalSubgroupoidSystem& nss);
NormalSubgroupoidSystem nss_from_json(const Json& j);

/// Exhaustive check of conditions 1-3 and the action axioms. Throws
/// PreconditionError for malformed input and ThetaNotWellDefined when theta
/// depends on the coset representative.
ValidationReport validate_nss(const FiniteGroupoid& g, const NormalSubgroupoidSystem& nss);

FiniteQuotient quotient_by_nss(const FiniteGroupoid& g, const NormalSubgroupoidSystem& nss);

/// Exact backtracking search; returns an isomorphism g -> h if one exists.
std::optional<FiniteMorphism> find_isomorphism(const FiniteGroupoid& g, const FiniteGroupoid& h);

}  // namespace folioid
