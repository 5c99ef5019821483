#include <gtest/gtest.h>

#include <Eigen/LU>
#include <cmath>

#include "folioid/dirac.hpp"
#include "folioid/errors.hpp"
#include "folioid/scenarios.hpp"

using namespace folioid;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

NumericParams params(int samples = 20) {
  NumericParams p;
  p.samples = samples;
  return p;
}

std::function<Vec(Rng&)> box(const ChartManifold& m) {
  return [m](Rng& rng) { return sample_in_box(m, rng, 2.0); };
}

Mat dxdy3() {
  Mat o = Mat::Zero(3, 3);
  o(0, 1) = 1;
  o(1, 0) = -1;
  return o;
}

Mat standard_pi() {
  Mat p(2, 2);
  p << 0, 1, -1, 0;
  return p;
}

const auto r2 = ChartManifold::euclidean(2);
const auto r3 = ChartManifold::euclidean(3);

DiracStructure presymplectic_r3() {
  return from_two_form(r3, [](const Vec&) { return dxdy3(); });
}

bool same_span(const Mat& a, const Mat& b, double tol = 1e-9) {
  return a.cols() == b.cols() && linalg::max_principal_angle(a, b) <= tol;
}

Mat coords(std::initializer_list<int> idx, int n) {
  Mat m = Mat::Zero(n, static_cast<Eigen::Index>(idx.size()));
  int c = 0;
  for (int i : idx) m(i, c++) = 1.0;
  return m;
}

}  // namespace

TEST(Pairing, Examples) {
  EXPECT_DOUBLE_EQ(pontryagin_pairing(vec({1, 0}), vec({0, 0}), vec({0, 1}), vec({0, 0})), 0.0);
  EXPECT_DOUBLE_EQ(pontryagin_pairing(vec({1, 0}), vec({2, 3}), vec({0, 1}), vec({1, 1})), 4.0);
  EXPECT_DOUBLE_EQ(pontryagin_pairing(vec({1, 0}), vec({0, 5}), vec({1, 0}), vec({0, 5})), 0.0);
  EXPECT_THROW(pontryagin_pairing(vec({1}), vec({0, 5}), vec({1, 0}), vec({0, 5})),
               StructuralError);
}

TEST(Graphs, PoissonGeneratorsFollowSharpConvention) {
  const auto d = from_poisson(constant_poisson(r2, standard_pi()));
  const Mat g = d.generator_matrix(vec({0.3, -1}));
  EXPECT_TRUE(g.col(0).isApprox(vec({0, 1, 1, 0})));
  EXPECT_TRUE(g.col(1).isApprox(vec({-1, 0, 0, 1})));
}

TEST(Graphs, ZeroFormAndZeroBivector) {
  const Vec x = vec({0.1, 0.2});
  const Mat tm = coords({0, 1}, 4);
  // graph of the zero map T*M -> TM
  EXPECT_TRUE(same_span(dirac_fiber(from_poisson(constant_poisson(r2, Mat::Zero(2, 2))), x),
                        coords({2, 3}, 4)));
  EXPECT_TRUE(
      same_span(dirac_fiber(from_two_form(r2, [](const Vec&) { return Mat(Mat::Zero(2, 2)); }), x),
                tm));
  EXPECT_TRUE(same_span(dirac_fiber(tangent_dirac(r2), x), tm));
}

TEST(Graphs, ConstructionsAreLagrangian) {
  const auto p = params(50);
  EXPECT_TRUE(check_lagrangian(presymplectic_r3(), p, box(r3)).pass);
  EXPECT_TRUE(check_lagrangian(from_poisson(constant_poisson(r2, standard_pi())), p, box(r2)).pass);
  EXPECT_TRUE(check_lagrangian(minus_double(presymplectic_r3()), p,
                               box(ChartManifold::euclidean(6)))
                  .pass);
  // A non-constant form is still a graph.
  const auto weighted = from_two_form(r3, [](const Vec& x) { return Mat(x[2] * dxdy3()); });
  EXPECT_TRUE(check_lagrangian(weighted, p, box(r3)).pass);
}

TEST(Graphs, NonIsotropicFamilyIsRejected) {
  DiracStructure d = tangent_dirac(r2);
  d.gens[0].second = OneForm::constant(r2, vec({1, 0}));
  const auto rep = check_lagrangian(d, params(5), box(r2));
  EXPECT_FALSE(rep.pass);
  EXPECT_NEAR(rep.max_residual, 2.0, 1e-12);
}

TEST(Characteristic, PresymplecticKernel) {
  const auto cs = characteristic_spaces(presymplectic_r3(), vec({0.5, -0.2, 1}));
  EXPECT_TRUE(same_span(cs.g0, coords({2}, 3)));
  EXPECT_EQ(cs.g1.cols(), 3);
  EXPECT_EQ(cs.p0.cols(), 0);
  EXPECT_TRUE(same_span(cs.p1, coords({0, 1}, 3)));
}

TEST(Characteristic, InvertiblePoissonHasTrivialG0) {
  const auto cs = characteristic_spaces(from_poisson(constant_poisson(r2, standard_pi())),
                                        vec({1, 1}));
  EXPECT_EQ(cs.g0.cols(), 0);
  EXPECT_EQ(cs.g1.cols(), 2);
}

TEST(Characteristic, TangentDirac) {
  const auto cs = characteristic_spaces(tangent_dirac(r3), vec({0, 0, 0}));
  EXPECT_EQ(cs.g0.cols(), 3);
  EXPECT_EQ(cs.p1.cols(), 0);
}

TEST(Characteristic, DistributionOfIntegrableStructureIsInvolutive) {
  const auto g0 = characteristic_distribution(presymplectic_r3(), vec({0, 0, 0}));
  EXPECT_EQ(g0.rank, 1);
  const auto p = params(30);
  EXPECT_TRUE(check_involutive(g0, p, box(r3)).pass);
  const auto g0_double =
      characteristic_distribution(minus_double(presymplectic_r3()), Vec::Zero(6));
  EXPECT_EQ(g0_double.rank, 2);
  EXPECT_TRUE(check_involutive(g0_double, p, box(ChartManifold::euclidean(6))).pass);
}

TEST(Courant, ConstantSectionsBracketToZero) {
  const std::pair e1{VectorField::constant(r2, vec({1, 2})), OneForm::constant(r2, vec({0, 3}))};
  const std::pair e2{VectorField::constant(r2, vec({-1, 0})), OneForm::constant(r2, vec({4, 1}))};
  const auto br = courant_bracket(e1, e2, vec({0.3, 0.7}));
  EXPECT_LT(br.v.norm(), 1e-9);
  EXPECT_LT(br.a.norm(), 1e-9);
}

TEST(Courant, LieDerivativeOfXdy) {
  const std::pair e1{VectorField::constant(r2, vec({1, 0})), OneForm::zero(r2)};
  const std::pair e2{VectorField::constant(r2, vec({0, 0})),
                     OneForm(r2, [](const Vec& x) { return vec({0, x[0]}); })};
  const auto br = courant_bracket(e1, e2, vec({0.4, -1.2}));
  EXPECT_LT(br.v.norm(), 1e-9);
  EXPECT_NEAR(br.a[0], 0.0, 1e-8);
  EXPECT_NEAR(br.a[1], 1.0, 1e-8);
}

TEST(Integrability, ClosedFormPasses) {
  EXPECT_TRUE(check_integrable(presymplectic_r3(), params(), box(r3)).pass);
  EXPECT_TRUE(
      check_integrable(from_poisson(constant_poisson(r2, standard_pi())), params(), box(r2)).pass);
}

TEST(Integrability, NonClosedFormFailsWithWitness) {
  const auto weighted = from_two_form(r3, [](const Vec& x) { return Mat(x[2] * dxdy3()); });
  const auto rep = check_integrable(weighted, params(), box(r3));
  EXPECT_FALSE(rep.pass);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_TRUE(rep.witness->contains("generators"));
}

TEST(Jacobi, ConstantAndLinearBivectors) {
  EXPECT_LT(jacobi_residual(constant_poisson(r2, standard_pi()), vec({1, 2})), 1e-12);
  // Linear Poisson structure of so(3)*: Pi^ij = eps_ijk x_k.
  const PoissonBivector so3{r3, [](const Vec& x) {
                              Mat p(3, 3);
                              p << 0, x[2], -x[1], -x[2], 0, x[0], x[1], -x[0], 0;
                              return p;
                            }};
  EXPECT_LT(jacobi_residual(so3, vec({0.3, -0.5, 1.1})), 1e-8);
  // x d/dx ^ d/dy + d/dx ^ d/dz: J_123 = Pi_31 d_1 Pi_12 = -1.
  const PoissonBivector bad{r3, [](const Vec& x) {
                              Mat p = Mat::Zero(3, 3);
                              p(0, 1) = x[0];
                              p(1, 0) = -x[0];
                              p(0, 2) = 1;
                              p(2, 0) = -1;
                              return p;
                            }};
  EXPECT_NEAR(jacobi_residual(bad, vec({0.2, 0.1, 0.3})), 1.0, 1e-8);
}

TEST(Forward, IdentityMap) {
  const auto d = presymplectic_r3();
  const SmoothMap id(r3, r3, [](const Vec& x) { return x; },
                     [](const Vec&) { return Mat(Mat::Identity(3, 3)); });
  EXPECT_TRUE(is_forward_dirac(id, d, d, params(), box(r3)).pass);
}

TEST(Forward, ProjectionDroppingKernel) {
  Mat drop = Mat::Zero(2, 3);
  drop(0, 0) = 1;
  drop(1, 1) = 1;
  const SmoothMap proj(r3, r2, [drop](const Vec& x) { return Vec(drop * x); },
                       [drop](const Vec&) { return drop; });
  // graph of omega on R^2 is the graph of its inverse
  const Mat pi = dxdy3().topLeftCorner(2, 2).eval().inverse();
  EXPECT_DOUBLE_EQ(pi(0, 1), -1.0);
  const auto d = presymplectic_r3();
  EXPECT_TRUE(is_forward_dirac(proj, d, from_poisson(constant_poisson(r2, pi)), params(), box(r3))
                  .pass);
  const auto rep =
      is_forward_dirac(proj, d, from_poisson(constant_poisson(r2, Mat(2 * pi))), params(), box(r3));
  EXPECT_FALSE(rep.pass);
  EXPECT_TRUE(rep.witness.has_value());
}

TEST(MinusDouble, CharacteristicSpaces) {
  const Vec x = vec({0.1, 0.2, 0.3, -0.4, 0.5, 0.6});
  EXPECT_EQ(characteristic_spaces(minus_double(tangent_dirac(r3)), x).g0.cols(), 6);
  EXPECT_TRUE(same_span(characteristic_spaces(minus_double(presymplectic_r3()), x).g0,
                        coords({2, 5}, 6)));
}

TEST(MinusDouble, GeneratorsSignConvention) {
  const auto d = minus_double(presymplectic_r3());
  const Mat g = d.generator_matrix(Vec::Zero(6));
  // second-factor copy of (e1, i_e1 omega): ((0, -e1), (0, dy))
  Vec want = Vec::Zero(12);
  want[3] = -1;
  want[10] = 1;
  EXPECT_TRUE(g.col(3).isApprox(want));
}

TEST(Multiplicative, PairDiracGroupoid) {
  const auto gd = pair_lie_groupoid(r3);
  const auto rep = check_multiplicative_dirac(gd, minus_double(presymplectic_r3()), params(10));
  EXPECT_TRUE(rep.pass) << rep.to_json().dump();
  EXPECT_EQ(rep.details["g0_rank"], 2);
}

TEST(Multiplicative, TangentProlongation) {
  const auto gd = pair_lie_groupoid(r2);
  EXPECT_TRUE(
      check_multiplicative_dirac(gd, tangent_dirac(ChartManifold::euclidean(4)), params(10)).pass);
  const auto vb = vb_trivial_groupoid(1, r2);
  EXPECT_TRUE(
      check_multiplicative_dirac(vb, tangent_dirac(ChartManifold::euclidean(3)), params(10)).pass);
}

TEST(Multiplicative, FaultInjectedStructureIsCaught) {
  auto d = minus_double(presymplectic_r3());
  const auto original = d.gens[0].second;
  d.gens[0].second = OneForm(d.base, [original](const Vec& x) {
    return Vec(x[0] > 0 ? 2.0 * original(x) : original(x));
  });
  const auto lag = check_lagrangian(d, params(20), box(d.base));
  const auto mult = check_multiplicative_dirac(pair_lie_groupoid(r3), d, params(10));
  EXPECT_FALSE(lag.pass && mult.pass);
}

TEST(Poisson, RoundTripThroughFiber) {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    Mat a = Mat::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        a(i, j) = rng.uniform(-2, 2);
        a(j, i) = -a(i, j);
      }
    }
    const auto d = from_poisson(constant_poisson(ChartManifold::euclidean(4), a));
    const auto back = poisson_from_fiber(dirac_fiber(d, Vec::Zero(4)));
    ASSERT_TRUE(back.has_value());
    EXPECT_LT((*back - a).cwiseAbs().maxCoeff(), 1e-7);
  }
  EXPECT_FALSE(poisson_from_fiber(dirac_fiber(presymplectic_r3(), Vec::Zero(3))).has_value());
}

TEST(UnitCovector, VanishesOnUnitsAndExtendsBasisValues) {
  const auto gd = pair_lie_groupoid(r2);
  const Vec p = vec({0.3, 1});
  const Mat basis = algebroid_fiber(gd, p).basis;
  const Vec a = vec({1.5, -2});
  const Vec beta = unit_covector(gd, p, a, basis);
  EXPECT_LT((gd.eps.jacobian(p).transpose() * beta).norm(), 1e-12);
  EXPECT_LT((basis.transpose() * beta - a).norm(), 1e-12);
}

TEST(Pushforward, PresymplecticPairMatchesHandOracle) {
  const auto sc = make_presymplectic_scenario(dxdy3(), params(20));
  const auto res = pushforward_dirac(sc.d_g, sc.smooth.leaves);
  EXPECT_TRUE(res.report.pass) << res.report.to_json().dump();
  EXPECT_EQ(res.report.details["g0_rank"], 0);
  // minus double of the graph of dx wedge dy on R^2
  Mat oracle = Mat::Zero(4, 4);
  oracle(0, 1) = -1;
  oracle(1, 0) = 1;
  oracle(2, 3) = 1;
  oracle(3, 2) = -1;
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const Vec q = rng.uniform_vec(4, -2, 2);
    EXPECT_LT((res.poisson.matrix(q) - oracle).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT(jacobi_residual(res.poisson, q), 1e-6);
  }
  EXPECT_TRUE(is_forward_dirac(sc.smooth.leaves.chart.lambda_g, sc.d_g, res.dirac, params(),
                               sc.smooth.leaves.gd.sampler.arrow)
                  .pass);
  EXPECT_TRUE(check_lagrangian(res.dirac, params(), box(ChartManifold::euclidean(4))).pass);
}

TEST(Pushforward, ResultIsMultiplicativeOnQuotient) {
  const auto sc = make_presymplectic_scenario(dxdy3(), params(5));
  const auto res = pushforward_dirac(sc.d_g, sc.smooth.leaves);
  ASSERT_TRUE(sc.smooth.quotient.has_value());
  const auto rep = check_multiplicative_dirac(*sc.smooth.quotient, res.dirac, params(10));
  EXPECT_TRUE(rep.pass) << rep.to_json().dump();
}

TEST(Pushforward, IdentityLabelsReturnTheStructure) {
  const auto p = params(10);
  const auto sc = make_pair_scenario(2, {}, p);
  Mat pi = Mat::Zero(4, 4);
  pi(0, 1) = 1;
  pi(1, 0) = -1;
  pi(2, 3) = -2;
  pi(3, 2) = 2;
  const auto d_g = from_poisson(constant_poisson(sc.leaves.gd.arrows, pi));
  const auto res = pushforward_dirac(d_g, sc.leaves);
  EXPECT_TRUE(res.report.pass) << res.report.to_json().dump();
  Rng rng(8);
  for (int k = 0; k < 10; ++k) {
    const Vec g = rng.uniform_vec(4, -2, 2);
    EXPECT_LE(linalg::max_principal_angle(res.fiber(g), dirac_fiber(d_g, g)), 1e-7);
  }
}

TEST(Pushforward, NontrivialG0DownstairsIsReported) {
  // Leaves of the zero distribution but a structure with kernel: the
  // characteristic space survives on the quotient.
  const auto p = params(5);
  const auto sc = make_pair_scenario(3, {}, p);
  const auto res = pushforward_dirac(minus_double(presymplectic_r3()), sc.leaves);
  EXPECT_FALSE(res.report.pass);
  ASSERT_TRUE(res.report.witness.has_value());
  EXPECT_EQ((*res.report.witness)["check"], "trivial characteristic space");
}

TEST(Scenario, PresymplecticValidation) {
  EXPECT_THROW(make_presymplectic_scenario(Mat::Identity(3, 3), params()), PreconditionError);
  Mat sympl = Mat::Zero(2, 2);
  sympl(0, 1) = 1;
  sympl(1, 0) = -1;
  EXPECT_THROW(make_presymplectic_scenario(sympl, params()), PreconditionError);
  EXPECT_THROW(make_presymplectic_scenario(dxdy3(), params(), 3), PreconditionError);
  const auto weighted = make_presymplectic_scenario(dxdy3(), params(), 2);
  EXPECT_FALSE(check_integrable(weighted.d_m, params(), box(r3)).pass);
}

TEST(Scenario, CoordinateComplementKeepsCoordinateOrder) {
  EXPECT_TRUE(complement_basis({vec({0, 0, 1})}, 3).isApprox(coords({0, 1}, 3)));
  EXPECT_TRUE(complement_basis({vec({0, 1, 0})}, 3).isApprox(coords({0, 2}, 3)));
}
