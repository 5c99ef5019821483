#include "folioid/liegroupoid.hpp"

#include <algorithm>
#include <cmath>

#include "folioid/errors.hpp"

namespace folioid {

using linalg::concat;
using linalg::hstack;
using linalg::null_space;
using linalg::numerical_rank;

Vec SmoothGroupoid::multiply(const Vec& g, const Vec& h) const {
  const double gap = composability_gap(g, h);
  if (!(gap <= tol_comp)) {
    throw CompositionError("arrows are not composable: |s(g) - t(h)| = " + std::to_string(gap));
  }
  return mul(concat(g, h));
}

Mat SmoothGroupoid::mul_jacobian(const Vec& g, const Vec& h) const {
  return mul.jacobian(concat(g, h));
}

double SmoothGroupoid::composability_gap(const Vec& g, const Vec& h) const {
  return objects.distance(s(g), t(h));
}

std::pair<Vec, Vec> SmoothGroupoid::sample_composable(Rng& rng) const {
  Vec g = sampler.arrow(rng);
  Vec h = sampler.arrow_with_target(rng, s(g));
  const double gap = composability_gap(g, h);
  if (!(gap <= tol_comp)) {
    throw SamplerError(name + ": sampler produced a non-composable pair (gap " +
                       std::to_string(gap) + ")");
  }
  return {std::move(g), std::move(h)};
}

Vec SmoothGroupoid::sample_arrow_with_source(Rng& rng, const Vec& p) const {
  return inv(sampler.arrow_with_target(rng, p));
}

namespace {

Mat selector(int rows, int cols, int offset) {
  Mat out = Mat::Zero(rows, cols);
  for (int i = 0; i < rows; ++i) out(i, offset + i) = 1.0;
  return out;
}

}  // namespace

SmoothGroupoid pair_lie_groupoid(const ChartManifold& m, double sample_radius) {
  const int n = m.dim();
  const ChartManifold g = ChartManifold::product(m, m);
  const ChartManifold gg = ChartManifold::product(g, g);
  SmoothGroupoid out;
  out.name = "pair";
  out.arrows = g;
  out.objects = m;
  out.t = SmoothMap(
      g, m, [n](const Vec& x) { return Vec(x.head(n)); },
      [n](const Vec&) { return selector(n, 2 * n, 0); });
  out.s = SmoothMap(
      g, m, [n](const Vec& x) { return Vec(x.tail(n)); },
      [n](const Vec&) { return selector(n, 2 * n, n); });
  out.eps = SmoothMap(
      m, g, [](const Vec& p) { return concat(p, p); },
      [n](const Vec&) { return linalg::vstack(Mat::Identity(n, n), Mat::Identity(n, n)); });
  out.inv = SmoothMap(
      g, g, [n](const Vec& x) { return concat(x.tail(n), x.head(n)); },
      [n](const Vec&) {
        return linalg::vstack(selector(n, 2 * n, n), selector(n, 2 * n, 0));
      });
  // (a, b) * (c, d) = (a, d)
  out.mul = SmoothMap(
      gg, g, [n](const Vec& x) { return concat(x.head(n), x.tail(n)); },
      [n](const Vec&) {
        return linalg::vstack(selector(n, 4 * n, 0), selector(n, 4 * n, 3 * n));
      });
  out.sampler.arrow = [g, sample_radius](Rng& rng) { return sample_in_box(g, rng, sample_radius); };
  out.sampler.object = [m, sample_radius](Rng& rng) {
    return sample_in_box(m, rng, sample_radius);
  };
  out.sampler.arrow_with_target = [m, sample_radius](Rng& rng, const Vec& p) {
    return concat(p, sample_in_box(m, rng, sample_radius));
  };
  return out;
}

SmoothGroupoid vb_trivial_groupoid(int k, const ChartManifold& m, double sample_radius) {
  const int n = m.dim();
  const ChartManifold fiber = ChartManifold::euclidean(k);
  const ChartManifold g = ChartManifold::product(fiber, m);
  const ChartManifold gg = ChartManifold::product(g, g);
  const int d = k + n;
  SmoothGroupoid out;
  out.name = "vb_trivial";
  out.arrows = g;
  out.objects = m;
  auto proj = [k](const Vec& x) { return Vec(x.tail(x.size() - k)); };
  auto proj_jac = [n, d, k](const Vec&) { return selector(n, d, k); };
  out.s = SmoothMap(g, m, proj, proj_jac);
  out.t = SmoothMap(g, m, proj, proj_jac);
  out.eps = SmoothMap(
      m, g, [k](const Vec& p) { return concat(Vec::Zero(k), p); },
      [n, d, k](const Vec&) {
        Mat j = Mat::Zero(d, n);
        j.bottomRows(n) = Mat::Identity(n, n);
        return j;
      });
  out.inv = SmoothMap(
      g, g,
      [k](const Vec& x) {
        Vec y = x;
        y.head(k) = -x.head(k);
        return y;
      },
      [d, k](const Vec&) {
        Mat j = Mat::Identity(d, d);
        j.topLeftCorner(k, k) *= -1.0;
        return j;
      });
  // (x, m) * (y, n) = (x + y, m)
  out.mul = SmoothMap(
      gg, g,
      [k, d](const Vec& z) {
        Vec out_v = z.head(d);
        out_v.head(k) += z.segment(d, k);
        return out_v;
      },
      [k, d](const Vec&) {
        Mat j = Mat::Zero(d, 2 * d);
        j.leftCols(d) = Mat::Identity(d, d);
        j.block(0, d, k, k) = Mat::Identity(k, k);
        return j;
      });
  out.sampler.arrow = [g, sample_radius](Rng& rng) { return sample_in_box(g, rng, sample_radius); };
  out.sampler.object = [m, sample_radius](Rng& rng) {
    return sample_in_box(m, rng, sample_radius);
  };
  out.sampler.arrow_with_target = [k, sample_radius](Rng& rng, const Vec& p) {
    return concat(rng.uniform_vec(k, -sample_radius, sample_radius), p);
  };
  return out;
}

CheckReport validate_smooth_groupoid(const SmoothGroupoid& gd, const NumericParams& params) {
  CheckReport rep;
  rep.name = "validate_smooth_groupoid";
  rep.tolerance = params.tol_axiom;
  rep.samples = params.samples;
  Rng rng(params.seed);
  const auto& G = gd.arrows;
  const auto& P = gd.objects;
  Json per_axiom = Json::object();
  auto note = [&](const char* axiom, double r, const Vec& g) {
    const double prev = per_axiom.contains(axiom) ? per_axiom[axiom].get<double>() : 0.0;
    per_axiom[axiom] = std::max(prev, std::isfinite(r) ? r : 1e300);
    rep.record(r, [&] { return Json{{"axiom", axiom}, {"g", to_json(g)}}; });
  };
  int rank_failures = 0;
  for (int i = 0; i < params.samples; ++i) {
    const auto [g, h] = gd.sample_composable(rng);
    const Vec k = gd.sampler.arrow_with_target(rng, gd.s(h));
    // Raw chart multiplication so a faulty m shows up as a residual rather
    // than as a composability exception further down.
    const Vec gh = gd.mul(concat(g, h));
    note("(i) source", P.distance(gd.s(gh), gd.s(h)), g);
    note("(i) target", P.distance(gd.t(gh), gd.t(g)), g);
    const Vec lhs = gd.mul(concat(gh, k));
    const Vec rhs = gd.mul(concat(g, gd.mul(concat(h, k))));
    note("(ii) associativity", G.distance(lhs, rhs), g);
    const Vec p = gd.sampler.object(rng);
    const Vec u = gd.eps(p);
    note("(iii) unit source", P.distance(gd.s(u), p), u);
    note("(iii) unit target", P.distance(gd.t(u), p), u);
    note("(iv) right unit", G.distance(gd.mul(concat(g, gd.eps(gd.s(g)))), g), g);
    note("(iv) left unit", G.distance(gd.mul(concat(gd.eps(gd.t(g)), g)), g), g);
    const Vec gi = gd.inv(g);
    note("(v) right inverse", G.distance(gd.mul(concat(g, gi)), gd.eps(gd.t(g))), g);
    note("(v) left inverse", G.distance(gd.mul(concat(gi, g)), gd.eps(gd.s(g))), g);
    const int n_p = gd.object_dim();
    if (numerical_rank(gd.s.jacobian(g), 1e-10) != n_p ||
        numerical_rank(gd.t.jacobian(g), 1e-10) != n_p) {
      ++rank_failures;
      rep.fail({{"axiom", "submersion"}, {"g", to_json(g)}});
    }
  }
  rep.details["axiom_max_residuals"] = per_axiom;
  rep.details["submersion_failures"] = rank_failures;
  return rep;
}

CheckReport check_structure_jacobians(const SmoothGroupoid& gd, const NumericParams& params,
                                      double tol, int points) {
  CheckReport rep;
  rep.name = "check_structure_jacobians";
  rep.tolerance = tol;
  rep.samples = points;
  Rng rng(params.seed ^ 0x5a5a5a5aULL);
  Json per_map = Json::object();
  auto check = [&](const char* label, const SmoothMap& f, const Vec& x) {
    const double r = jacobian_relative_error(f, x);
    const double prev = per_map.contains(label) ? per_map[label].get<double>() : 0.0;
    per_map[label] = std::max(prev, r);
    rep.record(r, [&] { return Json{{"map", label}, {"x", to_json(x)}}; });
  };
  for (int i = 0; i < points; ++i) {
    const Vec g = gd.sampler.arrow(rng);
    const Vec p = gd.sampler.object(rng);
    check("s", gd.s, g);
    check("t", gd.t, g);
    check("eps", gd.eps, p);
    check("inv", gd.inv, g);
    const auto [a, b] = gd.sample_composable(rng);
    check("mul", gd.mul, concat(a, b));
  }
  rep.details["max_relative_error"] = per_map;
  return rep;
}

TangentArrow tangent_mul(const SmoothGroupoid& gd, const TangentArrow& a, const TangentArrow& b,
                         double tol_tangent_comp) {
  const Vec base = gd.multiply(a.base, b.base);
  const double gap = (gd.s.jacobian(a.base) * a.v - gd.t.jacobian(b.base) * b.v).norm();
  if (!(gap <= tol_tangent_comp)) {
    throw TangentCompositionError("tangent vectors are not composable: |Ts v_g - Tt v_h| = " +
                                  std::to_string(gap));
  }
  return {base, gd.mul_jacobian(a.base, b.base) * concat(a.v, b.v)};
}

TangentArrow tangent_unit(const SmoothGroupoid& gd, const Vec& p, const Vec& v) {
  return {gd.eps(p), gd.eps.jacobian(p) * v};
}

Mat composable_tangent_pairs(const SmoothGroupoid& gd, const Vec& g, const Vec& h,
                             double tol_rank) {
  return null_space(hstack(gd.s.jacobian(g), -gd.t.jacobian(h)), tol_rank);
}

TangentArrow left_translation_tangent(const SmoothGroupoid& gd, const Vec& g,
                                      const TangentArrow& u, double tol) {
  const double off = (gd.t.jacobian(u.base) * u.v).norm();
  if (!(off <= tol * std::max(1.0, u.v.norm()))) {
    throw PreconditionError("left translation: vector is not tangent to the t-fiber (|Tt u| = " +
                            std::to_string(off) + ")");
  }
  return tangent_mul(gd, {g, Vec::Zero(gd.arrow_dim())}, u, tol * std::max(1.0, u.v.norm()));
}

TangentArrow right_translation_tangent(const SmoothGroupoid& gd, const Vec& g,
                                       const TangentArrow& u, double tol) {
  const double off = (gd.s.jacobian(u.base) * u.v).norm();
  if (!(off <= tol * std::max(1.0, u.v.norm()))) {
    throw PreconditionError("right translation: vector is not tangent to the s-fiber (|Ts u| = " +
                            std::to_string(off) + ")");
  }
  return tangent_mul(gd, u, {g, Vec::Zero(gd.arrow_dim())}, tol * std::max(1.0, u.v.norm()));
}

AlgebroidFiber algebroid_fiber(const SmoothGroupoid& gd, const Vec& p, double tol_rank) {
  const Vec unit = gd.eps(p);
  Mat basis = null_space(gd.t.jacobian(unit), tol_rank);
  const int expected = gd.arrow_dim() - gd.object_dim();
  if (basis.cols() != expected) {
    throw SpanDeficiency("algebroid fiber has dimension " + std::to_string(basis.cols()) +
                         ", expected " + std::to_string(expected));
  }
  return {p, std::move(basis)};
}

Mat algebroid_anchor(const SmoothGroupoid& gd, const AlgebroidFiber& fiber) {
  return gd.s.jacobian(gd.eps(fiber.p)) * fiber.basis;
}

Vec cotangent_source(const SmoothGroupoid& gd, const CotangentArrow& a, const Mat& basis) {
  const Vec unit = gd.eps(gd.s(a.base));
  // T L_g u = Dm(g, 1) (0, u)
  const Mat dm = gd.mul_jacobian(a.base, unit);
  const Mat translated = dm.rightCols(gd.arrow_dim()) * basis;
  return translated.transpose() * a.alpha;
}

Vec cotangent_target(const SmoothGroupoid& gd, const CotangentArrow& a, const Mat& basis) {
  const Vec p = gd.t(a.base);
  const Vec unit = gd.eps(p);
  // u - T eps Ts u lies in ker Ts at the unit; T R_g w = Dm(1, g) (w, 0).
  const Mat shifted = basis - gd.eps.jacobian(p) * (gd.s.jacobian(unit) * basis);
  const Mat dm = gd.mul_jacobian(unit, a.base);
  const Mat translated = dm.leftCols(gd.arrow_dim()) * shifted;
  return translated.transpose() * a.alpha;
}

Vec cotangent_source(const SmoothGroupoid& gd, const CotangentArrow& a, double tol_rank) {
  return cotangent_source(gd, a, algebroid_fiber(gd, gd.s(a.base), tol_rank).basis);
}

Vec cotangent_target(const SmoothGroupoid& gd, const CotangentArrow& a, double tol_rank) {
  return cotangent_target(gd, a, algebroid_fiber(gd, gd.t(a.base), tol_rank).basis);
}

CotangentArrow match_cotangent_source(const SmoothGroupoid& gd, const CotangentArrow& a,
                                      const Vec& want, double tol_rank) {
  const Mat basis = algebroid_fiber(gd, gd.s(a.base), tol_rank).basis;
  const Mat dm = gd.mul_jacobian(a.base, gd.eps(gd.s(a.base)));
  const Mat lt = (dm.rightCols(gd.arrow_dim()) * basis).transpose();
  const Vec correction = linalg::min_norm_solve(lt, want - lt * a.alpha, tol_rank);
  return {a.base, a.alpha + correction};
}

CotangentArrow cotangent_mul(const SmoothGroupoid& gd, const CotangentArrow& a,
                             const CotangentArrow& b, double tol_cot, double tol_rank) {
  const Vec base = gd.multiply(a.base, b.base);
  // One basis for both sides so the comparison does not depend on the
  // arbitrary choice of null-space basis.
  const Mat basis = algebroid_fiber(gd, gd.s(a.base), tol_rank).basis;
  const double gap = (cotangent_source(gd, a, basis) - cotangent_target(gd, b, basis)).norm();
  if (!(gap <= tol_cot * std::max(1.0, a.alpha.norm() + b.alpha.norm()))) {
    throw CompositionError("covectors are not composable: |s^(a) - t^(b)| = " +
                           std::to_string(gap));
  }
  const int n = gd.arrow_dim();
  const Mat pairs = composable_tangent_pairs(gd, a.base, b.base, tol_rank);
  const Mat images = gd.mul_jacobian(a.base, b.base) * pairs;  // n x k
  const Vec values = pairs.topRows(n).transpose() * a.alpha + pairs.bottomRows(n).transpose() * b.alpha;
  const int rank = numerical_rank(images, tol_rank);
  if (rank < n) {
    throw SpanDeficiency("products of composable tangent pairs span dimension " +
                         std::to_string(rank) + " < " + std::to_string(n));
  }
  // alpha . images_col = value_col for every pair
  const Vec alpha = linalg::min_norm_solve(images.transpose(), values, tol_rank);
  return {base, alpha};
}

}  // namespace folioid
