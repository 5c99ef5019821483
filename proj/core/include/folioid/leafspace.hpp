#pragma once

#include <functional>
#include <optional>

#include "folioid/liegroupoid.hpp"
#include "folioid/multdist.hpp"

namespace folioid {

/// First integrals coordinatizing the leaf spaces: lambda_g is constant on the
/// leaves of S, lambda_p on the leaves of S cap TP.
struct LeafChart {
  SmoothMap lambda_g;
  SmoothMap lambda_p;
};

struct QuotientArrow {
  Vec label;
  Vec representative;
};

struct QuotientObject {
  Vec label;
  Vec representative;
};

/// A path in P parametrized over [0, 1].
struct LeafPath {
  std::function<Vec(double)> point;
  std::function<Vec(double)> velocity;
};

/// Produces a path from `from` to `to` inside one leaf of S cap TP.
using LeafPathOracle = std::function<LeafPath(const Vec& from, const Vec& to)>;

/// Straight segment in the object chart; valid when the leaves are affine.
LeafPathOracle straight_line_oracle();

/// Everything the leaf-space operations need.
struct LeafSpace {
  SmoothGroupoid gd;
  Distribution s;
  LeafChart chart;
  NumericParams params;
  LeafPathOracle oracle = straight_line_oracle();
  /// Number of random S-flow moves used when resampling a representative.
  int resample_moves = 3;
};

/// dlambda_g(X_i) and dlambda_p(Y_j) at sampled points, for the generators of
/// S and of S cap TP.
CheckReport check_first_integrals(const LeafSpace& ls, double tol = 1e-5);

bool same_leaf(const LeafSpace& ls, const Vec& x, const Vec& y);
bool same_object_leaf(const LeafSpace& ls, const Vec& p, const Vec& q);

/// Moves x along a composition of random S-flows (stays in its leaf).
Vec random_leaf_move(const LeafSpace& ls, const Vec& x, Rng& rng);

/// Orthogonal projections of the coordinate fields onto S cap T^t G. They span
/// S cap T^t G and are smooth where its rank is constant.
std::vector<VectorField> target_fiber_fields(const LeafSpace& ls);

/// h in the leaf of g with t(h) = p, by integrating min-norm t-lifts of the
/// oracle path from t(g) to p. PreconditionError when t(g) and p lie on
/// different leaves, TransportFailed when the endpoint misses p.
Vec transport_to_target(const LeafSpace& ls, const Vec& g, const Vec& p);

/// Samples both inclusions of g * ([s(g)] cap t^-1(s(g))) = [g] cap t^-1(t(g)).
CheckReport check_condition6(const LeafSpace& ls);

/// Throws Condition6Violated carrying the witness when the check fails.
void require_condition6(const LeafSpace& ls);

QuotientArrow quotient_arrow(const LeafSpace& ls, const Vec& g);
QuotientObject quotient_object(const LeafSpace& ls, const Vec& p);

/// The structure maps on labels. With an Rng the result is also recomputed
/// from a resampled representative; a disagreement beyond tol_leaf throws
/// WellDefinednessViolated.
QuotientObject quotient_source(const LeafSpace& ls, const QuotientArrow& q, Rng* rng = nullptr);
QuotientObject quotient_target(const LeafSpace& ls, const QuotientArrow& q, Rng* rng = nullptr);
QuotientArrow quotient_unit(const LeafSpace& ls, const QuotientObject& p, Rng* rng = nullptr);
QuotientArrow quotient_inverse(const LeafSpace& ls, const QuotientArrow& q, Rng* rng = nullptr);

/// [g] * [h] = [g * h'] with h' the transport of h to t(h') = s(g). With an
/// Rng the product is recomputed from resampled representatives and a label
/// mismatch throws Condition6Violated. CompositionError when the labels are
/// not composable.
QuotientArrow quotient_mul(const LeafSpace& ls, const QuotientArrow& a, const QuotientArrow& b,
                           Rng* rng = nullptr);

/// Groupoid axioms on labels and the morphism property of the projection.
/// Details hold the quotient summary.
CheckReport validate_quotient_groupoid(const LeafSpace& ls);

/// Tangent and cotangent compatibility of the projection with an explicit
/// quotient groupoid whose arrow chart is the label space.
CheckReport check_lifted_structures(const LeafSpace& ls, const SmoothGroupoid& quotient,
                                    int samples = 50);

/// Constant rank of A^S = S cap AG, anchor of A^S inside ker T lambda_p, and
/// the induced map AG / A^S -> TP / ker T lambda_p agreeing across equal
/// object labels.
CheckReport check_ideal_system(const LeafSpace& ls);

}  // namespace folioid
