#include "folioid/multdist.hpp"

#include <cmath>
#include <string>

#include "folioid/errors.hpp"
#include "folioid/rng.hpp"

namespace folioid {

using linalg::concat;
using linalg::hstack;
using linalg::intersect;
using linalg::max_principal_angle;
using linalg::min_norm_solve;
using linalg::null_space;
using linalg::numerical_rank;
using linalg::range_basis;
using linalg::relative_distance_to_span;

namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

Json rank_drift_witness(const RankDrift& e) {
  return {{"error", "RankDrift"},
          {"message", e.what()},
          {"location", e.location()},
          {"expected", e.expected()},
          {"found", e.found()}};
}

// Keeps the first value seen per key and reports any later disagreement.
struct RankTracker {
  Json ranks = Json::object();
  bool record(CheckReport& rep, const std::string& key, int value, const Vec& where) {
    if (!ranks.contains(key)) {
      ranks[key] = value;
      return true;
    }
    if (ranks[key].get<int>() == value) return true;
    rep.fail({{"check", "constant rank of " + key},
              {"expected", ranks[key]},
              {"found", value},
              {"location", to_json(where)}});
    return false;
  }
};

}  // namespace

Distribution Distribution::zero(const ChartManifold& base) {
  Distribution d;
  d.base = base;
  d.rank = 0;
  return d;
}

Mat Distribution::generator_matrix(const Vec& x) const {
  Mat m(base.dim(), static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = gens[i](x);
  return m;
}

Distribution with_rank_at(Distribution d, const Vec& x) {
  d.rank = -1;
  d.rank = static_cast<int>(fiber_basis(d, x).cols());
  return d;
}

Distribution product_distribution(const Distribution& d1, const Distribution& d2) {
  Distribution out;
  out.base = ChartManifold::product(d1.base, d2.base);
  out.tol_rank = std::max(d1.tol_rank, d2.tol_rank);
  out.rank = (d1.rank >= 0 && d2.rank >= 0) ? d1.rank + d2.rank : -1;
  const int n1 = d1.base.dim();
  const int n2 = d2.base.dim();
  for (const auto& x : d1.gens) {
    out.gens.emplace_back(out.base, [x, n1, n2](const Vec& p) {
      return concat(x(p.head(n1)), Vec::Zero(n2));
    });
  }
  for (const auto& y : d2.gens) {
    out.gens.emplace_back(out.base, [y, n1, n2](const Vec& p) {
      return concat(Vec::Zero(n1), y(p.tail(n2)));
    });
  }
  return out;
}

Mat fiber_basis(const Distribution& s, const Vec& x) {
  if (!s.base.contains(x)) throw PreconditionError("fiber_basis: point outside the chart box");
  const Mat gens = s.generator_matrix(x);
  if (!gens.allFinite()) throw NumericalBlowup("fiber_basis: non-finite generator value");
  const Mat basis = gens.cols() == 0 ? Mat(s.base.dim(), 0) : range_basis(gens, s.tol_rank);
  if (s.rank >= 0 && basis.cols() != s.rank) {
    throw RankDrift("fiber_basis: rank " + std::to_string(basis.cols()) + " instead of " +
                        std::to_string(s.rank),
                    to_std(x), s.rank, static_cast<int>(basis.cols()));
  }
  return basis;
}

Mat s_cap_target_fiber(const SmoothGroupoid& gd, const Distribution& s, const Vec& g) {
  return intersect(fiber_basis(s, g), null_space(gd.t.jacobian(g), s.tol_rank), s.tol_rank);
}

Mat s_cap_source_fiber(const SmoothGroupoid& gd, const Distribution& s, const Vec& g) {
  return intersect(fiber_basis(s, g), null_space(gd.s.jacobian(g), s.tol_rank), s.tol_rank);
}

namespace {

// Basis of S(1_p) cap T eps(T_p P) in arrow coordinates.
Mat units_intersection(const SmoothGroupoid& gd, const Distribution& s, const Vec& p) {
  const Vec u = gd.eps(p);
  return intersect(fiber_basis(s, u), range_basis(gd.eps.jacobian(p), s.tol_rank), s.tol_rank);
}

}  // namespace

Mat s_cap_tp(const SmoothGroupoid& gd, const Distribution& s, const Vec& p) {
  const Mat inter = units_intersection(gd, s, p);
  if (inter.cols() == 0) return Mat(gd.object_dim(), 0);
  return range_basis(gd.s.jacobian(gd.eps(p)) * inter, s.tol_rank);
}

Distribution units_part(const SmoothGroupoid& gd, const Distribution& s) {
  Distribution out;
  out.base = gd.objects;
  out.tol_rank = s.tol_rank;
  const int n = gd.object_dim();
  for (int i = 0; i < n; ++i) {
    out.gens.emplace_back(gd.objects, [gd, s, i](const Vec& p) {
      const Mat inter = units_intersection(gd, s, p);
      const Vec e = gd.eps.jacobian(p).col(i);
      const Vec projected = inter * (inter.transpose() * e);
      return Vec(gd.s.jacobian(gd.eps(p)) * projected);
    });
  }
  return out;
}

CheckReport check_multiplicative(const SmoothGroupoid& gd, const Distribution& s,
                                 const NumericParams& params) {
  CheckReport rep;
  rep.name = "check_multiplicative";
  rep.tolerance = params.tol_member;
  rep.samples = params.samples;
  Rng rng(params.seed);
  for (int i = 0; i < params.samples; ++i) {
    const auto [g, h] = gd.sample_composable(rng);
    const Mat bg = fiber_basis(s, g);
    const Mat bh = fiber_basis(s, h);

    // (a) Ts and Tt of S(g) land in S cap TP.
    const Mat src_units = s_cap_tp(gd, s, gd.s(g));
    const Mat tgt_units = s_cap_tp(gd, s, gd.t(g));
    const Mat ds = gd.s.jacobian(g);
    const Mat dt = gd.t.jacobian(g);
    for (int c = 0; c < bg.cols(); ++c) {
      const Vec vs = ds * bg.col(c);
      const Vec vt = dt * bg.col(c);
      rep.record(relative_distance_to_span(src_units, vs), [&] {
        return Json{{"check", "Ts S(g) in S cap TP"}, {"g", to_json(g)}, {"v", to_json(vs)}};
      });
      rep.record(relative_distance_to_span(tgt_units, vt), [&] {
        return Json{{"check", "Tt S(g) in S cap TP"}, {"g", to_json(g)}, {"v", to_json(vt)}};
      });
    }

    // (b) products of composable S-vectors stay in S.
    if (bg.cols() > 0 && bh.cols() > 0) {
      const Mat pairs = null_space(hstack(ds * bg, -gd.t.jacobian(h) * bh), s.tol_rank);
      const Vec gh = gd.multiply(g, h);
      const Mat bgh = fiber_basis(s, gh);
      for (int c = 0; c < pairs.cols(); ++c) {
        const Vec vg = bg * pairs.col(c).head(bg.cols());
        const Vec vh = bh * pairs.col(c).tail(bh.cols());
        const auto prod = tangent_mul(gd, {g, vg}, {h, vh});
        rep.record(relative_distance_to_span(bgh, prod.v), [&] {
          return Json{{"check", "product in S"}, {"g", to_json(g)},   {"h", to_json(h)},
                      {"v_g", to_json(vg)},      {"v_h", to_json(vh)}, {"product", to_json(prod.v)}};
        });
      }
    }

    // (c) inversion.
    const Mat binv = fiber_basis(s, gd.inv(g));
    const Mat di = gd.inv.jacobian(g);
    for (int c = 0; c < bg.cols(); ++c) {
      const Vec w = di * bg.col(c);
      rep.record(relative_distance_to_span(binv, w), [&] {
        return Json{{"check", "Ti S(g) in S(g^-1)"}, {"g", to_json(g)}, {"v", to_json(w)}};
      });
    }
  }
  return rep;
}

CheckReport check_rank_structure(const SmoothGroupoid& gd, const Distribution& s,
                                 const NumericParams& params) {
  CheckReport rep;
  rep.name = "check_rank_structure";
  rep.tolerance = params.tol_angle;
  rep.samples = params.samples;
  Rng rng(params.seed + 1);
  RankTracker ranks;
  int splitting_failures = 0;
  try {
    for (int i = 0; i < params.samples; ++i) {
      const Vec p = gd.sampler.object(rng);
      const Vec u = gd.eps(p);
      const int r_units = static_cast<int>(fiber_basis(s, u).cols());
      const int r_tp = static_cast<int>(s_cap_tp(gd, s, p).cols());
      const int r_ag = static_cast<int>(s_cap_target_fiber(gd, s, u).cols());
      ranks.record(rep, "S at units", r_units, p);
      ranks.record(rep, "S cap TP", r_tp, p);
      ranks.record(rep, "S cap AG", r_ag, p);
      if (r_tp + r_ag != r_units) {
        ++splitting_failures;
        rep.fail({{"check", "splitting"},
                  {"p", to_json(p)},
                  {"rank_S_cap_TP", r_tp},
                  {"rank_S_cap_AG", r_ag},
                  {"rank_S_units", r_units}});
      }

      const Vec g = gd.sampler.arrow(rng);
      ranks.record(rep, "S", static_cast<int>(fiber_basis(s, g).cols()), g);
      const Mat st = s_cap_target_fiber(gd, s, g);
      ranks.record(rep, "S cap TtG", static_cast<int>(st.cols()), g);
      ranks.record(rep, "S cap TsG", static_cast<int>(s_cap_source_fiber(gd, s, g).cols()), g);

      // S^t(g) = 0_g * S^t(s(g))
      const Vec unit = gd.eps(gd.s(g));
      const Mat st_unit = s_cap_target_fiber(gd, s, unit);
      Mat moved(gd.arrow_dim(), st_unit.cols());
      for (int c = 0; c < st_unit.cols(); ++c) {
        moved.col(c) = left_translation_tangent(gd, g, {unit, st_unit.col(c)}).v;
      }
      const Mat moved_basis = moved.cols() == 0 ? moved : range_basis(moved, s.tol_rank);
      const double angle =
          (moved_basis.cols() == 0 && st.cols() == 0) ? 0.0 : max_principal_angle(moved_basis, st);
      rep.record(angle, [&] {
        return Json{{"check", "S^t(g) = TL_g S^t(s(g))"}, {"g", to_json(g)}};
      });
    }
  } catch (const RankDrift& e) {
    rep.fail(rank_drift_witness(e));
  }
  rep.details["ranks"] = ranks.ranks;
  rep.details["splitting_failures"] = splitting_failures;
  return rep;
}

CheckReport check_ts_surjectivity(const SmoothGroupoid& gd, const Distribution& s,
                                  const NumericParams& params) {
  CheckReport rep;
  rep.name = "check_ts_surjectivity";
  rep.samples = params.samples;
  Rng rng(params.seed + 2);
  auto check_at = [&](const Vec& g) {
    const Mat b = fiber_basis(s, g);
    const int want_s = static_cast<int>(s_cap_tp(gd, s, gd.s(g)).cols());
    const int want_t = static_cast<int>(s_cap_tp(gd, s, gd.t(g)).cols());
    const int got_s = b.cols() == 0 ? 0 : numerical_rank(gd.s.jacobian(g) * b, s.tol_rank);
    const int got_t = b.cols() == 0 ? 0 : numerical_rank(gd.t.jacobian(g) * b, s.tol_rank);
    if (got_s != want_s || got_t != want_t) {
      rep.fail({{"g", to_json(g)},
                {"rank_Ts_S", got_s},
                {"rank_S_cap_TP_at_source", want_s},
                {"rank_Tt_S", got_t},
                {"rank_S_cap_TP_at_target", want_t}});
    }
  };
  try {
    for (int i = 0; i < params.samples; ++i) {
      check_at(gd.sampler.arrow(rng));
      check_at(gd.eps(gd.sampler.object(rng)));
    }
  } catch (const RankDrift& e) {
    rep.fail(rank_drift_witness(e));
  }
  return rep;
}

DescendingSection lift_section(const SmoothGroupoid& gd, const Distribution& s,
                               const VectorField& xbar, DescentMode mode,
                               const NumericParams& params) {
  Rng rng(params.seed + 3);
  for (int i = 0; i < params.samples; ++i) {
    const Vec p = gd.sampler.object(rng);
    const Vec value = xbar(p);
    const double r = relative_distance_to_span(s_cap_tp(gd, s, p), value);
    if (!(r <= params.tol_member)) {
      throw PreconditionError("lift_section: base field leaves S cap TP at p = " +
                              to_json(p).dump() + " (distance " + std::to_string(r) + ")");
    }
  }
  const double tol_desc = params.tol_desc;
  VectorField lifted(gd.arrows, [gd, s, xbar, mode, tol_desc](const Vec& g) {
    const Mat b = fiber_basis(s, g);
    const bool source = mode == DescentMode::Source;
    const Vec target = xbar(source ? gd.s(g) : gd.t(g));
    const Mat d = source ? gd.s.jacobian(g) : gd.t.jacobian(g);
    if (b.cols() == 0) {
      if (target.norm() > tol_desc) {
        throw LiftFailed("lift_section: S(g) = 0 but the base field is not", to_std(g),
                         target.norm());
      }
      return Vec(Vec::Zero(gd.arrow_dim()));
    }
    const Mat a = d * b;
    const Vec c = min_norm_solve(a, target, s.tol_rank);
    const double residual = (a * c - target).norm();
    if (!(residual <= tol_desc)) {
      throw LiftFailed("lift_section: residual " + std::to_string(residual), to_std(g), residual);
    }
    return Vec(b * c);
  });
  return {std::move(lifted), xbar, mode, false};
}

CheckReport check_descending(const SmoothGroupoid& gd, const Distribution& s,
                             const DescendingSection& section, const NumericParams& params) {
  CheckReport rep;
  rep.name = "check_descending";
  rep.tolerance = params.tol_desc;
  rep.samples = params.samples;
  Rng rng(params.seed + 4);
  const bool source = section.mode == DescentMode::Source;
  for (int i = 0; i < params.samples; ++i) {
    const Vec g = gd.sampler.arrow(rng);
    const Vec x = section.X(g);
    const Mat d = source ? gd.s.jacobian(g) : gd.t.jacobian(g);
    const Vec want = section.Xbar(source ? gd.s(g) : gd.t(g));
    rep.record((d * x - want).norm(), [&] {
      return Json{{"check", "descent"}, {"g", to_json(g)}, {"X", to_json(x)}};
    });
    rep.record(relative_distance_to_span(fiber_basis(s, g), x), [&] {
      return Json{{"check", "X in S"}, {"g", to_json(g)}, {"X", to_json(x)}};
    });
  }
  return rep;
}

CheckReport check_involutive(const Distribution& s, const NumericParams& params) {
  const ChartManifold base = s.base;
  const double radius = params.sample_radius;
  return check_involutive(s, params,
                          [base, radius](Rng& rng) { return sample_in_box(base, rng, radius); });
}

CheckReport check_involutive(const Distribution& s, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample) {
  CheckReport rep;
  rep.name = "check_involutive";
  rep.tolerance = params.tol_member;
  rep.samples = params.samples;
  Rng rng(params.seed + 5);
  try {
    for (int k = 0; k < params.samples; ++k) {
      const Vec x = sample(rng);
      const Mat b = fiber_basis(s, x);
      for (std::size_t i = 0; i < s.gens.size(); ++i) {
        for (std::size_t j = i + 1; j < s.gens.size(); ++j) {
          const Vec br = lie_bracket(s.gens[i], s.gens[j], x, params.h_fd);
          rep.record(relative_distance_to_span(b, br), [&] {
            return Json{{"x", to_json(x)},
                        {"generators", {i, j}},
                        {"bracket", to_json(br)}};
          });
        }
      }
    }
  } catch (const RankDrift& e) {
    rep.fail(rank_drift_witness(e));
  }
  return rep;
}

CheckReport check_completeness(const std::vector<VectorField>& fields,
                               const std::function<Vec(Rng&)>& sample,
                               const NumericParams& params, int points) {
  CheckReport rep;
  rep.name = "check_completeness";
  rep.samples = points;
  Rng rng(params.seed + 6);
  for (int k = 0; k < points; ++k) {
    const Vec x = sample(rng);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      for (double sign : {1.0, -1.0}) {
        try {
          (void)flow_for(fields[i], x, sign * params.t_max, params.rk4_steps_per_unit);
        } catch (const FlowEscapedBox& e) {
          rep.fail({{"field", i}, {"x", to_json(x)}, {"escaped_at", sign * e.time()}});
        } catch (const NumericalBlowup& e) {
          rep.fail({{"field", i}, {"x", to_json(x)}, {"blowup", e.what()}});
        }
      }
    }
  }
  return rep;
}

}  // namespace folioid
