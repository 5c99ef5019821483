#pragma once

#include <functional>
#include <string>

#include "folioid/geomcore.hpp"
#include "folioid/params.hpp"
#include "folioid/report.hpp"
#include "folioid/rng.hpp"

namespace folioid {

/// Random points supplied by a scenario. Composable pairs are built from
/// arrow_with_target, so no root finding is needed.
struct GroupoidSampler {
  std::function<Vec(Rng&)> arrow;
  std::function<Vec(Rng&)> object;
  /// Random h with t(h) = p.
  std::function<Vec(Rng&, const Vec&)> arrow_with_target;
};

/// Lie groupoid G => P on single charts. `mul` is defined on the G x G chart
/// (g first, h second) and is smooth near the fiber product.
struct SmoothGroupoid {
  std::string name;
  ChartManifold arrows;
  ChartManifold objects;
  SmoothMap s, t, eps, inv, mul;
  GroupoidSampler sampler;
  double tol_comp = 1e-8;

  int arrow_dim() const { return arrows.dim(); }
  int object_dim() const { return objects.dim(); }

  /// m(g, h); throws CompositionError when |s(g) - t(h)| > tol_comp.
  Vec multiply(const Vec& g, const Vec& h) const;
  /// D m at (g, h), of shape n_G x 2 n_G.
  Mat mul_jacobian(const Vec& g, const Vec& h) const;
  double composability_gap(const Vec& g, const Vec& h) const;

  /// g with a random composable partner h (s(g) = t(h)).
  std::pair<Vec, Vec> sample_composable(Rng& rng) const;
  /// Random h with s(h) = p, via the inverse of an arrow with target p.
  Vec sample_arrow_with_source(Rng& rng, const Vec& p) const;
};

struct TangentArrow {
  Vec base;
  Vec v;
};

struct CotangentArrow {
  Vec base;
  Vec alpha;
};

/// Orthonormal basis of A_p G = ker T t at eps(p).
struct AlgebroidFiber {
  Vec p;
  Mat basis;
};

// Builtin groupoids.

/// Pair groupoid M x M => M; arrow (m, n) has target m and source n.
SmoothGroupoid pair_lie_groupoid(const ChartManifold& m, double sample_radius = 2.0);

/// Trivial vector-bundle groupoid R^k x M => M with fiberwise addition.
/// Coordinates (x, m), s = t = projection to m.
SmoothGroupoid vb_trivial_groupoid(int k, const ChartManifold& m, double sample_radius = 2.0);

/// Sampled axioms (i)-(v) plus submersion ranks of s and t. The report's
/// details record the maximum residual per axiom.
CheckReport validate_smooth_groupoid(const SmoothGroupoid& gd, const NumericParams& params);

/// Analytic Jacobians of s, t, eps, inv, mul against central differences.
CheckReport check_structure_jacobians(const SmoothGroupoid& gd, const NumericParams& params,
                                      double tol = 1e-5, int points = 100);

/// Tangent prolongation: (m(g,h), Dm (v_g, v_h)). Throws CompositionError or
/// TangentCompositionError when the pair is not composable.
TangentArrow tangent_mul(const SmoothGroupoid& gd, const TangentArrow& a, const TangentArrow& b,
                         double tol_tangent_comp = 1e-7);

/// 1_{v_p} = T eps v_p.
TangentArrow tangent_unit(const SmoothGroupoid& gd, const Vec& p, const Vec& v);

/// Composable tangent pairs at (g, h): orthonormal basis of ker [Ds(g), -Dt(h)],
/// each column stacking (v_g, v_h).
Mat composable_tangent_pairs(const SmoothGroupoid& gd, const Vec& g, const Vec& h,
                             double tol_rank = 1e-10);

/// T L_g u = 0_g * u for u tangent at an arrow b with t(b) = s(g) and Tt u = 0.
TangentArrow left_translation_tangent(const SmoothGroupoid& gd, const Vec& g,
                                      const TangentArrow& u, double tol = 1e-7);

/// T R_g u = u * 0_g for u tangent at b with s(b) = t(g) and Ts u = 0.
TangentArrow right_translation_tangent(const SmoothGroupoid& gd, const Vec& g,
                                       const TangentArrow& u, double tol = 1e-7);

AlgebroidFiber algebroid_fiber(const SmoothGroupoid& gd, const Vec& p, double tol_rank = 1e-10);

/// Ts applied to each basis column.
Mat algebroid_anchor(const SmoothGroupoid& gd, const AlgebroidFiber& fiber);

/// s^(alpha)(u) = alpha(T L_g u) for u in A_{s(g)}, as components in the
/// fiber basis at s(g).
Vec cotangent_source(const SmoothGroupoid& gd, const CotangentArrow& a,
                     double tol_rank = 1e-10);

/// t^(alpha)(u) = alpha(T R_g (u - T eps Ts u)) for u in A_{t(g)}, in the fiber
/// basis at t(g).
Vec cotangent_target(const SmoothGroupoid& gd, const CotangentArrow& a,
                     double tol_rank = 1e-10);

/// Both maps against an explicit basis of the algebroid fiber (columns are
/// tangent vectors at the unit over the relevant object).
Vec cotangent_source(const SmoothGroupoid& gd, const CotangentArrow& a, const Mat& basis);
Vec cotangent_target(const SmoothGroupoid& gd, const CotangentArrow& a, const Mat& basis);

/// a shifted by the min-norm covector that makes its source equal `want`
/// (components in the default fiber basis at s(g)).
CotangentArrow match_cotangent_source(const SmoothGroupoid& gd, const CotangentArrow& a,
                                      const Vec& want, double tol_rank = 1e-10);

/// The covector at gh with (a * b)(v_g * v_h) = a(v_g) + b(v_h), solved by least
/// squares over composable tangent pairs. Throws CompositionError when the
/// covectors are not composable and SpanDeficiency when the products of
/// composable pairs do not span T_{gh} G.
CotangentArrow cotangent_mul(const SmoothGroupoid& gd, const CotangentArrow& a,
                             const CotangentArrow& b, double tol_cot = 1e-7,
                             double tol_rank = 1e-10);

}  // namespace folioid
