// One line per acceptance criterion. Usage: acceptance [c1 ... c8]; no
// arguments runs all of them. Exit status is nonzero if any selected
// criterion fails.

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "folioid/dirac.hpp"
#include "folioid/errors.hpp"
#include "folioid/fingroupoid.hpp"
#include "folioid/leafspace.hpp"
#include "folioid/multdist.hpp"
#include "folioid/rng.hpp"
#include "folioid/runner.hpp"
#include "folioid/scenarios.hpp"

using namespace folioid;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note << " [failed: " << what << "]";
    }
  }
};

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

NumericParams params(int samples) {
  NumericParams p;
  p.samples = samples;
  return p;
}

SmoothScenario basegp(int samples) { return make_pair_scenario(2, {vec({1, 0})}, params(samples)); }

SmoothScenario ex_vb(int samples) {
  return make_vb_scenario(2, {vec({1, 0})}, 2, {vec({1, 0})}, params(samples));
}

bool isomorphic_quotients(const FiniteScenario& sc) {
  const auto a = quotient_by_normal_subgroupoid(sc.groupoid, sc.normal).quotient;
  const auto b = quotient_by_nss(sc.groupoid, *sc.nss).quotient;
  return find_isomorphism(a, b).has_value();
}

void c1(Outcome& o) {
  const auto pair4 = make_finite_pair4();
  const auto z4 = make_finite_z4_bundle(true);
  const auto z4_trivial = make_finite_z4_bundle(false);
  for (const auto* sc : {&pair4, &z4, &z4_trivial}) {
    o.require(validate_nss(sc->groupoid, *sc->nss).valid(), sc->name + " system invalid");
  }
  const bool iso_pair = isomorphic_quotients(pair4);
  const bool iso_z4 = isomorphic_quotients(z4);
  const bool iso_z4_trivial = isomorphic_quotients(z4_trivial);
  o.note << "pair4 isomorphic=" << iso_pair << ", z4_bundle isomorphic=" << iso_z4
         << ", z4_bundle with trivial object relation isomorphic=" << iso_z4_trivial;
  o.require(iso_pair, "pair4 quotients differ");
  o.require(!iso_z4, "z4_bundle quotients agree");
  o.require(iso_z4_trivial, "z4_bundle with trivial relation differs");
}

// Max label residual of the leaf-space structure maps against closed-form
// label algebra, over `samples` random label triples.
double label_algebra_residual(const LeafSpace& ls, int samples,
                              const std::function<Vec(Rng&)>& sample_pair,
                              const std::function<Vec(const Vec&, const Vec&)>& expected) {
  Rng rng(ls.params.seed + 99);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Vec gh = sample_pair(rng);
    const int n = ls.gd.arrow_dim();
    const Vec g = gh.head(n);
    const Vec h = gh.tail(n);
    const auto qg = quotient_arrow(ls, g);
    const auto qh = quotient_arrow(ls, h);
    const auto prod = quotient_mul(ls, qg, qh, &rng);
    worst = std::max(worst, (prod.label - expected(qg.label, qh.label)).norm());
  }
  return worst;
}

void c2(Outcome& o) {
  const auto sc = basegp(200);
  const auto& ls = sc.leaves;
  const auto& p = ls.params;
  const auto mult = check_multiplicative(ls.gd, ls.s, p);
  const auto ranks = check_rank_structure(ls.gd, ls.s, p);
  const auto inv = check_involutive(ls.s, p, ls.gd.sampler.arrow);
  const auto c6 = check_condition6(ls);
  const auto vq = validate_quotient_groupoid(ls);
  const auto& r = ranks.details["ranks"];
  o.require(mult.pass, "check_multiplicative");
  o.require(ranks.pass, "check_rank_structure");
  o.require(inv.pass, "check_involutive");
  o.require(c6.pass, "check_condition6");
  o.require(vq.pass, "validate_quotient_groupoid");
  o.require(r["S at units"] == 2 && r["S cap TP"] == 1 && r["S cap AG"] == 1, "ranks 2/1/1");
  // Pair groupoid of R on labels: (y1, y2)(y2, y3) = (y1, y3).
  const double res = label_algebra_residual(
      ls, 200,
      [](Rng& rng) {
        const Vec y = rng.uniform_vec(3, -2, 2);
        const Vec x = rng.uniform_vec(4, -2, 2);
        return vec({x[0], y[0], x[1], y[1], x[2], y[1], x[3], y[2]});
      },
      [](const Vec& a, const Vec& b) { return vec({a[0], b[1]}); });
  o.note << "ranks S|P/S cap TP/S cap AG = " << r["S at units"] << "/" << r["S cap TP"] << "/"
         << r["S cap AG"] << ", quotient dims " << vq.details["arrow_label_dim"] << "/"
         << vq.details["object_label_dim"] << ", label algebra residual " << res
         << " over 200 samples (tol 1e-6)";
  o.require(vq.details["arrow_label_dim"] == 2 && vq.details["object_label_dim"] == 1,
            "quotient dimensions");
  o.require(res <= 1e-6, "label algebra residual");
}

void c3(Outcome& o) {
  const auto sc = ex_vb(200);
  const auto& ls = sc.leaves;
  const auto vq = validate_quotient_groupoid(ls);
  o.require(vq.pass, "validate_quotient_groupoid");
  // Labels (x2, m2): (a, m)(b, m) = (a + b, m) over the same base leaf.
  const double res = label_algebra_residual(
      ls, 200,
      [](Rng& rng) {
        const Vec u = rng.uniform_vec(8, -2, 2);
        return vec({u[0], u[1], u[2], u[3], u[4], u[5], u[6], u[3]});
      },
      [](const Vec& a, const Vec& b) { return vec({a[0] + b[0], a[1]}); });
  o.note << "(x+y+W) x L_m additive label residual " << res << " over 200 samples (tol 1e-6)";
  o.require(res <= 1e-6, "additive label residual");
}

void c4(Outcome& o) {
  const auto sc = make_group_action_scenario(2, vec({1, 1}), params(200));
  const auto& ls = sc.leaves;
  const auto c6 = check_condition6(ls);
  const auto vq = validate_quotient_groupoid(ls);
  const int arrow_dim = vq.details["arrow_label_dim"];
  const int object_dim = vq.details["object_label_dim"];
  // An arrow between two points of one orbit has equal source and target
  // labels; in a pair groupoid it must be the unit.
  const Vec g = vec({0, 0, 1, 1});
  const auto qg = quotient_arrow(ls, g);
  const auto unit = quotient_unit(ls, quotient_source(ls, qg));
  const double isotropy = (qg.label - unit.label).norm();
  o.note << "condition-6 residual " << c6.max_residual << " (tol 1e-8), quotient axioms "
         << (vq.pass ? "hold" : "fail") << ", quotient arrow/object dims " << arrow_dim << "/"
         << object_dim << " (pair groupoid of R needs 2/1), isotropy label gap " << isotropy;
  o.require(c6.pass && c6.max_residual <= 1e-8, "condition-6 residual");
  o.require(vq.pass, "quotient groupoid axioms");
  o.require(arrow_dim == 2 * object_dim, "quotient is not the pair groupoid of R");
  o.require(isotropy <= 1e-8, "nontrivial isotropy");
}

void c5(Outcome& o) {
  for (const auto& sc : {basegp(200), ex_vb(200)}) {
    const auto& ls = sc.leaves;
    const auto rep = check_rank_structure(ls.gd, ls.s, ls.params);
    const auto& r = rep.details["ranks"];
    const bool split = r["S cap TP"].get<int>() + r["S cap AG"].get<int>() ==
                       r["S at units"].get<int>();
    o.note << sc.family << ": " << r["S cap TP"] << "+" << r["S cap AG"] << "=" << r["S at units"]
           << ", max angle " << rep.max_residual << "; ";
    o.require(split, sc.family + " splitting identity");
    o.require(rep.pass && rep.max_residual <= 1e-5, sc.family + " rank structure");
  }
  o.note << "200 samples each, tol 1e-5";
}

void c6(Outcome& o) {
  const auto sc = basegp(50);
  const auto rep = check_lifted_structures(sc.leaves, *sc.quotient, 50);
  o.note << "tangent and cotangent identities, 50 composable samples, max residual "
         << rep.max_residual << " (tol 1e-6), per identity " << rep.details["max_residuals"].dump();
  o.require(rep.pass && rep.max_residual <= 1e-6, "lifted structures");
}

void c7(Outcome& o) {
  Mat omega = Mat::Zero(3, 3);
  omega(0, 1) = 1;
  omega(1, 0) = -1;
  const auto p = params(50);
  const auto sc = make_presymplectic_scenario(omega, p);
  const auto& gd = sc.smooth.leaves.gd;
  const auto integrable = check_integrable(sc.d_g, p, gd.sampler.arrow);
  const auto weighted = make_presymplectic_scenario(omega, p, 2);
  const auto nonclosed = check_integrable(weighted.d_g, p, gd.sampler.arrow);
  const auto push = pushforward_dirac(sc.d_g, sc.smooth.leaves);
  Mat oracle = Mat::Zero(4, 4);
  oracle(0, 1) = -1;
  oracle(1, 0) = 1;
  oracle(2, 3) = 1;
  oracle(3, 2) = -1;
  Rng rng(7);
  double gap = 0.0;
  double jacobi = 0.0;
  Mat last;
  for (int k = 0; k < 20; ++k) {
    const Vec q = rng.uniform_vec(4, -2, 2);
    last = push.poisson.matrix(q);
    gap = std::max(gap, (last - oracle).cwiseAbs().maxCoeff());
    jacobi = std::max(jacobi, jacobi_residual(push.poisson, q));
  }
  const auto fwd = is_forward_dirac(sc.smooth.leaves.chart.lambda_g, sc.d_g, push.dirac, p,
                                    gd.sampler.arrow);
  o.note << "integrable " << integrable.pass << ", z-weighted fails " << !nonclosed.pass
         << " (witness " << nonclosed.witness.has_value() << "), quotient g0 rank "
         << push.report.details["g0_rank"] << ", pi(dx1,dy1)=" << last(0, 1)
         << " pi(dx2,dy2)=" << last(2, 3) << ", oracle gap " << gap << " (tol 1e-6), Jacobi "
         << jacobi << ", forward Dirac residual " << fwd.max_residual;
  o.require(integrable.pass, "closed form integrable");
  o.require(!nonclosed.pass && nonclosed.witness.has_value(), "non-closed variant fails");
  o.require(push.report.pass, "pushforward report");
  o.require(push.report.details["g0_rank"] == 0, "trivial characteristic space");
  o.require(gap <= 1e-6, "hand oracle");
  o.require(jacobi <= 1e-6, "Jacobi");
  o.require(fwd.pass, "forward Dirac");
}

void c8(Outcome& o) {
  const auto p = params(100);
  // Structure maps and label maps with analytic Jacobians.
  const auto pair = basegp(100);
  const auto vb = ex_vb(100);
  const auto ga = make_group_action_scenario(2, vec({1, 1}), p);
  int maps = 0;
  double worst = 0.0;
  for (const auto* gd : {&pair.leaves.gd, &vb.leaves.gd}) {
    const auto rep = check_structure_jacobians(*gd, p, 1e-5, 100);
    o.require(rep.pass, gd->name + " structure Jacobians");
    worst = std::max(worst, rep.max_residual);
    maps += 5;
  }
  Rng rng(11);
  for (const auto* sc : {&pair, &vb, &ga}) {
    for (const auto* f : {&sc->leaves.chart.lambda_g, &sc->leaves.chart.lambda_p}) {
      if (!f->has_analytic_jacobian()) continue;
      ++maps;
      for (int k = 0; k < 100; ++k) {
        const double r = jacobian_relative_error(*f, sample_in_box(f->domain(), rng, 2.0));
        worst = std::max(worst, r);
      }
    }
  }
  o.require(worst <= 1e-5, "Jacobian relative error");

  // Flow semigroup on a nonlinear field.
  const auto r2 = ChartManifold::euclidean(2);
  const VectorField field(r2, [](const Vec& x) { return vec({std::sin(x[1]), std::cos(x[0])}); });
  double semigroup = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Vec x = rng.uniform_vec(2, -2, 2);
    const double s = rng.uniform(-1, 1);
    const double t = rng.uniform(-1, 1);
    const Vec a = flow_for(field, flow_for(field, x, s), t);
    const Vec b = flow_for(field, x, s + t);
    semigroup = std::max(semigroup, (a - b).norm());
  }
  o.require(semigroup <= 1e-7, "flow semigroup");

  // Seeded reports from the bundled configs, run twice.
  bool stable = true;
  for (const char* name : {"ex_basegp.json", "ex_vb.json", "presymplectic.json",
                           "finite_z4_bundle.json"}) {
    auto cfg = load_config(std::string(FOLIOID_CONFIG_DIR) + "/" + name);
    cfg.numeric.samples = std::min(cfg.numeric.samples, 50);
    const auto a = without_wall_times(run_scenario(cfg).report).dump(2);
    const auto b = without_wall_times(run_scenario(cfg).report).dump(2);
    stable = stable && a == b;
  }
  o.require(stable, "byte-stable reports");
  o.note << maps << " analytic maps, worst relative Jacobian error " << worst
         << " (tol 1e-5), flow semigroup gap " << semigroup
         << " (tol 1e-7), reports byte-stable " << stable;
}

const std::vector<std::pair<std::string, std::pair<std::string, void (*)(Outcome&)>>> kCriteria = {
    {"c1", {"finite quotient duality", c1}},
    {"c2", {"base groupoid example end to end", c2}},
    {"c3", {"vector bundle example end to end", c3}},
    {"c4", {"group action scenario", c4}},
    {"c5", {"constant rank suite", c5}},
    {"c6", {"tangent and cotangent structures", c6}},
    {"c7", {"Dirac pipeline", c7}},
    {"c8", {"numerical hygiene", c8}},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& [id, entry] : kCriteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    Outcome o;
    try {
      entry.second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.note << " [exception: " << e.what() << "]";
    }
    std::printf("%s %s: %s: %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), entry.first.c_str(),
                o.note.str().c_str());
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
