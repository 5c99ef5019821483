#include "folioid/leafspace.hpp"

#include <cmath>
#include <string>

#include "folioid/errors.hpp"
#include "folioid/rng.hpp"

namespace folioid {

using linalg::concat;
using linalg::min_norm_solve;
using linalg::null_space;
using linalg::projector;

namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Vec move_along(const std::vector<VectorField>& fields, const Vec& x, Rng& rng, int moves,
               int steps_per_unit) {
  Vec y = x;
  if (fields.empty()) return y;
  for (int i = 0; i < moves; ++i) {
    const auto& field = fields[rng.index(fields.size())];
    y = flow_for(field, y, rng.uniform(-1.0, 1.0), steps_per_unit);
  }
  return y;
}

Vec random_object_move(const LeafSpace& ls, const Vec& p, Rng& rng) {
  return move_along(units_part(ls.gd, ls.s).gens, p, rng, ls.resample_moves,
                    ls.params.rk4_steps_per_unit);
}

// Tracks the maximum residual per named identity.
struct AxiomLog {
  CheckReport& rep;
  Json per = Json::object();
  void note(const std::string& key, double r, const std::function<Json()>& witness) {
    const double prev = per.contains(key) ? per[key].get<double>() : 0.0;
    per[key] = std::max(prev, std::isfinite(r) ? r : 1e300);
    rep.record(r, [&] {
      Json w = witness();
      w["identity"] = key;
      return w;
    });
  }
};

}  // namespace

LeafPathOracle straight_line_oracle() {
  return [](const Vec& from, const Vec& to) {
    const Vec delta = to - from;
    return LeafPath{[from, delta](double tau) { return Vec(from + tau * delta); },
                    [delta](double) { return delta; }};
  };
}

CheckReport check_first_integrals(const LeafSpace& ls, double tol) {
  CheckReport rep;
  rep.name = "check_first_integrals";
  rep.tolerance = tol;
  rep.samples = ls.params.samples;
  Rng rng(ls.params.seed + 10);
  const auto up = units_part(ls.gd, ls.s);
  for (int i = 0; i < ls.params.samples; ++i) {
    const Vec g = ls.gd.sampler.arrow(rng);
    const Mat dg = ls.chart.lambda_g.jacobian(g);
    for (std::size_t k = 0; k < ls.s.gens.size(); ++k) {
      const double r = (dg * ls.s.gens[k](g)).norm();
      rep.record(r, [&] { return Json{{"map", "lambda_g"}, {"generator", k}, {"x", to_json(g)}}; });
    }
    const Vec p = ls.gd.sampler.object(rng);
    const Mat dp = ls.chart.lambda_p.jacobian(p);
    for (std::size_t k = 0; k < up.gens.size(); ++k) {
      const double r = (dp * up.gens[k](p)).norm();
      rep.record(r, [&] { return Json{{"map", "lambda_p"}, {"generator", k}, {"x", to_json(p)}}; });
    }
  }
  return rep;
}

bool same_leaf(const LeafSpace& ls, const Vec& x, const Vec& y) {
  return (ls.chart.lambda_g(x) - ls.chart.lambda_g(y)).norm() <= ls.params.tol_leaf;
}

bool same_object_leaf(const LeafSpace& ls, const Vec& p, const Vec& q) {
  return (ls.chart.lambda_p(p) - ls.chart.lambda_p(q)).norm() <= ls.params.tol_leaf;
}

Vec random_leaf_move(const LeafSpace& ls, const Vec& x, Rng& rng) {
  return move_along(ls.s.gens, x, rng, ls.resample_moves, ls.params.rk4_steps_per_unit);
}

std::vector<VectorField> target_fiber_fields(const LeafSpace& ls) {
  std::vector<VectorField> out;
  const int n = ls.gd.arrow_dim();
  for (int i = 0; i < n; ++i) {
    out.emplace_back(ls.gd.arrows, [gd = ls.gd, s = ls.s, i](const Vec& x) {
      const Mat b = s_cap_target_fiber(gd, s, x);
      return Vec(b * b.row(i).transpose());
    });
  }
  return out;
}

Vec transport_to_target(const LeafSpace& ls, const Vec& g, const Vec& p) {
  const auto& gd = ls.gd;
  const Vec from = gd.t(g);
  if (!same_object_leaf(ls, from, p)) {
    throw PreconditionError("transport_to_target: t(g) and p lie on different leaves");
  }
  if ((from - p).norm() == 0.0) return g;
  const LeafPath path = ls.oracle(from, p);
  const double tol_desc = ls.params.tol_desc;
  auto rhs = [&](double tau, const Vec& x) -> Vec {
    const Mat b = fiber_basis(ls.s, x);
    const Vec want = path.velocity(tau);
    if (b.cols() == 0) {
      if (want.norm() > tol_desc) {
        throw LiftFailed("transport_to_target: S vanishes along the path", to_std(x), want.norm());
      }
      return Vec::Zero(x.size());
    }
    const Mat a = gd.t.jacobian(x) * b;
    const Vec c = min_norm_solve(a, want, ls.s.tol_rank);
    const double residual = (a * c - want).norm();
    if (!(residual <= tol_desc)) {
      throw LiftFailed("transport_to_target: path velocity has no lift in S", to_std(x),
                       residual);
    }
    return b * c;
  };
  const double length = (p - from).norm();
  const int steps = std::max(
      1, static_cast<int>(std::ceil(length * static_cast<double>(ls.params.rk4_steps_per_unit))));
  const Vec h = integrate(gd.arrows, rhs, g, 1.0, steps);
  const double miss = gd.objects.distance(gd.t(h), p);
  if (!(miss <= ls.params.tol_target)) {
    throw TransportFailed("transport_to_target: |t(h) - p| = " + std::to_string(miss));
  }
  return h;
}

CheckReport check_condition6(const LeafSpace& ls) {
  CheckReport rep;
  rep.name = "check_condition6";
  rep.tolerance = ls.params.tol_leaf;
  rep.samples = ls.params.samples;
  Rng rng(ls.params.seed + 11);
  const auto& gd = ls.gd;
  const auto& lg = ls.chart.lambda_g;
  const auto fields = target_fiber_fields(ls);
  const int spu = ls.params.rk4_steps_per_unit;
  AxiomLog log{rep};
  for (int i = 0; i < ls.params.samples; ++i) {
    const Vec g = gd.sampler.arrow(rng);
    const Vec p = gd.s(g);
    // (incl. 1) g * y for y in the leaf of 1_p inside t^-1(p).
    const Vec y = move_along(fields, gd.eps(p), rng, ls.resample_moves, spu);
    const Vec gy = gd.mul(concat(g, y));
    const double r1 = std::max({(lg(gy) - lg(g)).norm(), gd.objects.distance(gd.t(gy), gd.t(g)),
                                gd.objects.distance(gd.t(y), p)});
    log.note("g * ([s(g)] cap t^-1(s(g))) in [g] cap t^-1(t(g))", r1, [&] {
      return Json{{"g", to_json(g)}, {"y", to_json(y)}, {"product", to_json(gy)}};
    });
    // (incl. 2) g^-1 * z for z in the leaf of g inside t^-1(t(g)).
    const Vec z = move_along(fields, g, rng, ls.resample_moves, spu);
    const Vec w = gd.mul(concat(gd.inv(g), z));
    const double r2 =
        std::max({(lg(w) - lg(gd.eps(p))).norm(), gd.objects.distance(gd.t(w), p),
                  gd.objects.distance(gd.t(z), gd.t(g))});
    log.note("g^-1 * ([g] cap t^-1(t(g))) in [s(g)] cap t^-1(s(g))", r2, [&] {
      return Json{{"g", to_json(g)}, {"z", to_json(z)}, {"product", to_json(w)}};
    });
  }
  rep.details["max_residuals"] = log.per;
  rep.details["moves_per_sample"] = ls.resample_moves;
  return rep;
}

void require_condition6(const LeafSpace& ls) {
  const auto rep = check_condition6(ls);
  if (!rep.pass) {
    throw Condition6Violated("condition (6) fails at a sampled arrow",
                             rep.witness ? rep.witness->dump() : "{}");
  }
}

QuotientArrow quotient_arrow(const LeafSpace& ls, const Vec& g) {
  return {ls.chart.lambda_g(g), g};
}

QuotientObject quotient_object(const LeafSpace& ls, const Vec& p) {
  return {ls.chart.lambda_p(p), p};
}

namespace {

void require_same(const LeafSpace& ls, const Vec& a, const Vec& b, const char* what) {
  const double gap = (a - b).norm();
  if (!(gap <= ls.params.tol_leaf)) {
    throw WellDefinednessViolated(std::string(what) + ": representative drift " +
                                  std::to_string(gap));
  }
}

}  // namespace

QuotientObject quotient_source(const LeafSpace& ls, const QuotientArrow& q, Rng* rng) {
  const Vec p = ls.gd.s(q.representative);
  QuotientObject out{ls.chart.lambda_p(p), p};
  if (rng) {
    const Vec moved = random_leaf_move(ls, q.representative, *rng);
    require_same(ls, ls.chart.lambda_p(ls.gd.s(moved)), out.label, "quotient_source");
  }
  return out;
}

QuotientObject quotient_target(const LeafSpace& ls, const QuotientArrow& q, Rng* rng) {
  const Vec p = ls.gd.t(q.representative);
  QuotientObject out{ls.chart.lambda_p(p), p};
  if (rng) {
    const Vec moved = random_leaf_move(ls, q.representative, *rng);
    require_same(ls, ls.chart.lambda_p(ls.gd.t(moved)), out.label, "quotient_target");
  }
  return out;
}

QuotientArrow quotient_unit(const LeafSpace& ls, const QuotientObject& p, Rng* rng) {
  const Vec u = ls.gd.eps(p.representative);
  QuotientArrow out{ls.chart.lambda_g(u), u};
  if (rng) {
    const Vec moved = random_object_move(ls, p.representative, *rng);
    require_same(ls, ls.chart.lambda_g(ls.gd.eps(moved)), out.label, "quotient_unit");
  }
  return out;
}

QuotientArrow quotient_inverse(const LeafSpace& ls, const QuotientArrow& q, Rng* rng) {
  const Vec gi = ls.gd.inv(q.representative);
  QuotientArrow out{ls.chart.lambda_g(gi), gi};
  if (rng) {
    const Vec moved = random_leaf_move(ls, q.representative, *rng);
    require_same(ls, ls.chart.lambda_g(ls.gd.inv(moved)), out.label, "quotient_inverse");
  }
  return out;
}

namespace {

Vec product_representative(const LeafSpace& ls, const Vec& g, const Vec& h) {
  const Vec moved = transport_to_target(ls, h, ls.gd.s(g));
  return ls.gd.multiply(g, moved);
}

}  // namespace

QuotientArrow quotient_mul(const LeafSpace& ls, const QuotientArrow& a, const QuotientArrow& b,
                           Rng* rng) {
  const auto& gd = ls.gd;
  const double gap = (ls.chart.lambda_p(gd.s(a.representative)) -
                      ls.chart.lambda_p(gd.t(b.representative)))
                         .norm();
  if (!(gap <= ls.params.tol_leaf)) {
    throw CompositionError("quotient_mul: [s]([g]) and [t]([h]) differ by " +
                           std::to_string(gap));
  }
  const Vec rep = product_representative(ls, a.representative, b.representative);
  QuotientArrow out{ls.chart.lambda_g(rep), rep};
  if (rng) {
    const Vec a2 = random_leaf_move(ls, a.representative, *rng);
    const Vec b2 = random_leaf_move(ls, b.representative, *rng);
    const Vec label2 = ls.chart.lambda_g(product_representative(ls, a2, b2));
    const double drift = (label2 - out.label).norm();
    if (!(drift <= ls.params.tol_leaf)) {
      const Json witness{{"g", to_json(a.representative)}, {"h", to_json(b.representative)},
                         {"g_moved", to_json(a2)},         {"h_moved", to_json(b2)},
                         {"label", to_json(out.label)},    {"label_moved", to_json(label2)}};
      throw Condition6Violated("quotient_mul: product label depends on representatives",
                               witness.dump());
    }
  }
  return out;
}

CheckReport validate_quotient_groupoid(const LeafSpace& ls) {
  CheckReport rep;
  rep.name = "validate_quotient_groupoid";
  rep.tolerance = ls.params.tol_leaf;
  rep.samples = ls.params.samples;
  Rng rng(ls.params.seed + 12);
  const auto& gd = ls.gd;
  AxiomLog log{rep};
  int errors = 0;
  for (int i = 0; i < ls.params.samples; ++i) {
    try {
      const auto [g, h] = gd.sample_composable(rng);
      const Vec k = gd.sampler.arrow_with_target(rng, gd.s(h));
      // Resampled representatives so that products need transport.
      const auto qa = quotient_arrow(ls, random_leaf_move(ls, g, rng));
      const auto qb = quotient_arrow(ls, random_leaf_move(ls, h, rng));
      const auto qc = quotient_arrow(ls, random_leaf_move(ls, k, rng));
      auto wit = [&] { return Json{{"g", to_json(g)}, {"h", to_json(h)}, {"k", to_json(k)}}; };

      const auto ab = quotient_mul(ls, qa, qb);
      log.note("morphism: [g h] = [g] * [h]",
               (ls.chart.lambda_g(gd.multiply(g, h)) - ab.label).norm(), wit);
      log.note("(i) [s]([g]*[h]) = [s]([h])",
               (quotient_source(ls, ab).label - quotient_source(ls, qb).label).norm(), wit);
      log.note("(i) [t]([g]*[h]) = [t]([g])",
               (quotient_target(ls, ab).label - quotient_target(ls, qa).label).norm(), wit);
      const auto left = quotient_mul(ls, ab, qc);
      const auto right = quotient_mul(ls, qa, quotient_mul(ls, qb, qc));
      log.note("(ii) associativity", (left.label - right.label).norm(), wit);

      const auto obj = quotient_object(ls, gd.sampler.object(rng));
      const auto unit = quotient_unit(ls, obj);
      log.note("(iii) [s](1) = object", (quotient_source(ls, unit).label - obj.label).norm(), wit);
      log.note("(iii) [t](1) = object", (quotient_target(ls, unit).label - obj.label).norm(), wit);

      const auto src_unit = quotient_unit(ls, quotient_source(ls, qa));
      const auto tgt_unit = quotient_unit(ls, quotient_target(ls, qa));
      log.note("(iv) right unit", (quotient_mul(ls, qa, src_unit).label - qa.label).norm(), wit);
      log.note("(iv) left unit", (quotient_mul(ls, tgt_unit, qa).label - qa.label).norm(), wit);
      const auto qi = quotient_inverse(ls, qa);
      log.note("(v) right inverse", (quotient_mul(ls, qa, qi).label - tgt_unit.label).norm(), wit);
      log.note("(v) left inverse", (quotient_mul(ls, qi, qa).label - src_unit.label).norm(), wit);
      log.note("morphism: [s] lambda_g = lambda_p s",
               (quotient_source(ls, qa).label - ls.chart.lambda_p(gd.s(g))).norm(), wit);
    } catch (const Error& e) {
      ++errors;
      rep.fail({{"error", e.what()}});
    }
  }
  rep.details["object_label_dim"] = ls.chart.lambda_p.codomain().dim();
  rep.details["arrow_label_dim"] = ls.chart.lambda_g.codomain().dim();
  rep.details["sampled_axiom_residuals"] = log.per;
  rep.details["sample_errors"] = errors;
  return rep;
}

CheckReport check_lifted_structures(const LeafSpace& ls, const SmoothGroupoid& quotient,
                                    int samples) {
  CheckReport rep;
  rep.name = "check_lifted_structures";
  rep.tolerance = ls.params.tol_lift;
  rep.samples = samples;
  Rng rng(ls.params.seed + 13);
  const auto& gd = ls.gd;
  const auto& lg = ls.chart.lambda_g;
  const auto& lp = ls.chart.lambda_p;
  const int n = gd.arrow_dim();
  const int nq = quotient.arrow_dim();
  AxiomLog log{rep};
  for (int i = 0; i < samples; ++i) {
    const auto [g, h] = gd.sample_composable(rng);
    const Vec gh = gd.multiply(g, h);
    auto wit = [&] { return Json{{"g", to_json(g)}, {"h", to_json(h)}}; };

    // Tangent side: v_[g], v_[h] composable in the quotient, lifted to
    // v_g, v_h; w_g in S(g) repairs composability upstairs.
    const Vec vg = rng.normal_vec(n);
    const Mat lpt = lp.jacobian(gd.t(h)) * gd.t.jacobian(h);
    const Vec want = lp.jacobian(gd.s(g)) * gd.s.jacobian(g) * vg;
    Vec vh = min_norm_solve(lpt, want, 1e-12);
    const Mat kernel = null_space(lpt, 1e-12);
    if (kernel.cols() > 0) vh += kernel * rng.normal_vec(kernel.cols());
    const Mat bg = fiber_basis(ls.s, g);
    const Vec gap = gd.s.jacobian(g) * vg - gd.t.jacobian(h) * vh;
    Vec wg = Vec::Zero(n);
    if (bg.cols() > 0) wg = bg * min_norm_solve(gd.s.jacobian(g) * bg, gap, ls.s.tol_rank);
    log.note("w_g repairs composability", (gd.s.jacobian(g) * (vg - wg) - gd.t.jacobian(h) * vh).norm(),
             wit);
    const auto up = tangent_mul(gd, {g, vg - wg}, {h, vh}, 1e-6);
    const Vec lhs = lg.jacobian(gh) * up.v;
    const auto down =
        tangent_mul(quotient, {lg(g), lg.jacobian(g) * vg}, {lg(h), lg.jacobian(h) * vh}, 1e-6);
    log.note("T pr((v_g - w_g) * v_h) = v_[g] * v_[h]", (lhs - down.v).norm(), wit);

    // Cotangent side.
    const Vec qg = lg(g);
    const Vec qh = lg(h);
    const CotangentArrow bq{qh, rng.normal_vec(nq)};
    const CotangentArrow aq = match_cotangent_source(
        quotient, {qg, rng.normal_vec(nq)}, cotangent_target(quotient, bq));
    const auto prod_q = cotangent_mul(quotient, aq, bq);
    const Vec pulled = lg.jacobian(gh).transpose() * prod_q.alpha;
    const auto prod_g = cotangent_mul(gd, {g, lg.jacobian(g).transpose() * aq.alpha},
                                      {h, lg.jacobian(h).transpose() * bq.alpha});
    log.note("pr^*(a * b) = pr^* a * pr^* b", (pulled - prod_g.alpha).norm(), wit);
  }
  rep.details["max_residuals"] = log.per;
  return rep;
}

CheckReport check_ideal_system(const LeafSpace& ls) {
  CheckReport rep;
  rep.name = "check_ideal_system";
  rep.tolerance = ls.params.tol_member;
  rep.samples = ls.params.samples;
  Rng rng(ls.params.seed + 14);
  const auto& gd = ls.gd;
  const auto& lg = ls.chart.lambda_g;
  const auto& lp = ls.chart.lambda_p;
  AxiomLog log{rep};
  int rank = -1;
  try {
    for (int i = 0; i < ls.params.samples; ++i) {
      const Vec p = gd.sampler.object(rng);
      const Vec u = gd.eps(p);
      const Mat as = s_cap_target_fiber(gd, ls.s, u);
      if (rank < 0) rank = static_cast<int>(as.cols());
      if (as.cols() != rank) {
        rep.fail({{"check", "constant rank of A^S"},
                  {"p", to_json(p)},
                  {"expected", rank},
                  {"found", as.cols()}});
      }
      // Condition 3: the anchor maps A^S into ker T lambda_p.
      const Mat anchor = lp.jacobian(p) * gd.s.jacobian(u) * as;
      for (int c = 0; c < anchor.cols(); ++c) {
        log.note("anchor(A^S) in ker T pr_o", anchor.col(c).norm(),
                 [&] { return Json{{"p", to_json(p)}}; });
      }
      // Condition 4 on coordinate sections: u_q and its theta-image u_p have
      // the same anchor class.
      const Vec q = random_object_move(ls, p, rng);
      const Mat bp = algebroid_fiber(gd, p).basis;
      const Mat bq = algebroid_fiber(gd, q).basis;
      const Mat push_p = lg.jacobian(u) * bp;
      const Vec uq_unit = gd.eps(q);
      for (int c = 0; c < bq.cols(); ++c) {
        const Vec image = lg.jacobian(uq_unit) * bq.col(c);
        const Vec coeff = min_norm_solve(push_p, image, 1e-12);
        log.note("theta((p,q), u_q) exists", (push_p * coeff - image).norm(),
                 [&] { return Json{{"p", to_json(p)}, {"q", to_json(q)}}; });
        const Vec anchor_p = lp.jacobian(p) * gd.s.jacobian(u) * (bp * coeff);
        const Vec anchor_q = lp.jacobian(q) * gd.s.jacobian(uq_unit) * bq.col(c);
        log.note("theta-equivariance of the anchor class", (anchor_p - anchor_q).norm(),
                 [&] { return Json{{"p", to_json(p)}, {"q", to_json(q)}}; });
      }
    }
  } catch (const RankDrift& e) {
    rep.fail({{"error", "RankDrift"}, {"message", e.what()}});
  }
  rep.details["rank_A_S"] = rank;
  rep.details["max_residuals"] = log.per;
  return rep;
}

}  // namespace folioid
