#pragma once

#include <vector>

#include "folioid/geomcore.hpp"
#include "folioid/liegroupoid.hpp"
#include "folioid/params.hpp"
#include "folioid/report.hpp"

namespace folioid {

/// Constant-rank distribution given by a spanning family of vector fields.
/// A negative rank means "not declared"; fiber_basis then skips the check.
struct Distribution {
  ChartManifold base;
  std::vector<VectorField> gens;
  double tol_rank = 1e-8;
  int rank = -1;

  static Distribution zero(const ChartManifold& base);
  /// Generators evaluated at x, one column each (n x 0 when there are none).
  Mat generator_matrix(const Vec& x) const;
};

/// Declared rank taken from the generator matrix at x.
Distribution with_rank_at(Distribution d, const Vec& x);

/// D1 x D2 on the product chart: generators (X_i, 0) and (0, Y_j).
Distribution product_distribution(const Distribution& d1, const Distribution& d2);

/// Orthonormal basis of span{gens(x)}; RankDrift when the rank differs from
/// the declared one.
Mat fiber_basis(const Distribution& s, const Vec& x);

/// S(g) intersected with ker Tt(g), resp. ker Ts(g).
Mat s_cap_target_fiber(const SmoothGroupoid& gd, const Distribution& s, const Vec& g);
Mat s_cap_source_fiber(const SmoothGroupoid& gd, const Distribution& s, const Vec& g);

/// S(1_p) intersected with T eps (T_p P), as vectors tangent to P.
Mat s_cap_tp(const SmoothGroupoid& gd, const Distribution& s, const Vec& p);

/// S cap TP as a distribution on P. Its generators are Ts of the projections
/// of T eps(e_i) onto S(1_p) cap T eps(TP), which are smooth when the rank is
/// constant.
Distribution units_part(const SmoothGroupoid& gd, const Distribution& s);

CheckReport check_multiplicative(const SmoothGroupoid& gd, const Distribution& s,
                                 const NumericParams& params);

/// Ranks of S, S cap TP, S cap T^t G, S cap T^s G, their constancy, the
/// splitting count at units and the left-translation identity for S^t.
/// Details carry the observed ranks.
CheckReport check_rank_structure(const SmoothGroupoid& gd, const Distribution& s,
                                 const NumericParams& params);

CheckReport check_ts_surjectivity(const SmoothGroupoid& gd, const Distribution& s,
                                  const NumericParams& params);

enum class DescentMode { Source, Target };

struct DescendingSection {
  VectorField X;
  VectorField Xbar;
  DescentMode mode = DescentMode::Target;
  bool complete = false;
};

/// Pointwise min-norm lift of Xbar into S through Ts (mode Source) or Tt
/// (mode Target). Xbar must take values in S cap TP (PreconditionError
/// otherwise, checked at sampled objects). The returned field throws
/// LiftFailed wherever the lift residual exceeds tol_desc.
DescendingSection lift_section(const SmoothGroupoid& gd, const Distribution& s,
                               const VectorField& xbar, DescentMode mode,
                               const NumericParams& params);

/// Descent relation and membership of X in S at sampled arrows.
CheckReport check_descending(const SmoothGroupoid& gd, const Distribution& s,
                             const DescendingSection& section, const NumericParams& params);

/// Brackets of generator pairs stay in S at sampled points of the box.
CheckReport check_involutive(const Distribution& s, const NumericParams& params);
/// Same, sampling with the supplied point generator.
CheckReport check_involutive(const Distribution& s, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample);

/// Integrates each field for times in [-t_max, t_max] from sampled points and
/// reports box escapes or blowups. A spot check only.
CheckReport check_completeness(const std::vector<VectorField>& fields,
                               const std::function<Vec(Rng&)>& sample,
                               const NumericParams& params, int points = 10);

}  // namespace folioid
