#include <benchmark/benchmark.h>

#include "folioid/dirac.hpp"
#include "folioid/fingroupoid.hpp"
#include "folioid/leafspace.hpp"
#include "folioid/multdist.hpp"
#include "folioid/rng.hpp"
#include "folioid/scenarios.hpp"

using namespace folioid;

namespace {

NumericParams params(int samples) {
  NumericParams p;
  p.samples = samples;
  return p;
}

Mat dxdy3() {
  Mat o = Mat::Zero(3, 3);
  o(0, 1) = 1;
  o(1, 0) = -1;
  return o;
}

SmoothScenario basegp(int m, int samples) {
  Vec e = Vec::Zero(m);
  e[0] = 1;
  return make_pair_scenario(m, {e}, params(samples));
}

void BM_FiniteQuotientByNss(benchmark::State& state) {
  const auto sc = make_finite_z4_bundle(true);
  for (auto _ : state) benchmark::DoNotOptimize(quotient_by_nss(sc.groupoid, *sc.nss));
}
BENCHMARK(BM_FiniteQuotientByNss);

void BM_FiniteIsomorphism(benchmark::State& state) {
  const auto sc = make_finite_pair4();
  const auto a = quotient_by_normal_subgroupoid(sc.groupoid, sc.normal).quotient;
  const auto b = quotient_by_nss(sc.groupoid, *sc.nss).quotient;
  for (auto _ : state) benchmark::DoNotOptimize(find_isomorphism(a, b));
}
BENCHMARK(BM_FiniteIsomorphism);

void BM_CotangentMul(benchmark::State& state) {
  const auto gd = pair_lie_groupoid(ChartManifold::euclidean(static_cast<int>(state.range(0))));
  Rng rng(1);
  const auto [g, h] = gd.sample_composable(rng);
  const int n = gd.arrow_dim();
  const Vec beta = rng.normal_vec(n);
  const CotangentArrow b{h, beta};
  const Vec want = cotangent_target(gd, b);
  const auto a = match_cotangent_source(gd, {g, rng.normal_vec(n)}, want);
  for (auto _ : state) benchmark::DoNotOptimize(cotangent_mul(gd, a, b));
}
BENCHMARK(BM_CotangentMul)->Arg(2)->Arg(4)->Arg(8);

void BM_RankStructure(benchmark::State& state) {
  const auto sc = basegp(static_cast<int>(state.range(0)), 20);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_rank_structure(sc.leaves.gd, sc.leaves.s, sc.leaves.params));
  }
}
BENCHMARK(BM_RankStructure)->Arg(2)->Arg(4);

void BM_QuotientMul(benchmark::State& state) {
  const auto sc = basegp(2, 1);
  const auto& ls = sc.leaves;
  Rng rng(2);
  const auto [g, h] = ls.gd.sample_composable(rng);
  Vec h2 = h;
  h2[0] += 0.7;  // move off s(g) along the leaf
  const auto qg = quotient_arrow(ls, g);
  const auto qh = quotient_arrow(ls, h2);
  for (auto _ : state) benchmark::DoNotOptimize(quotient_mul(ls, qg, qh));
}
BENCHMARK(BM_QuotientMul);

void BM_Condition6(benchmark::State& state) {
  const auto sc = basegp(2, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(check_condition6(sc.leaves));
}
BENCHMARK(BM_Condition6)->Arg(10)->Arg(50);

void BM_PushforwardDirac(benchmark::State& state) {
  const auto sc = make_presymplectic_scenario(dxdy3(), params(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(pushforward_dirac(sc.d_g, sc.smooth.leaves));
}
BENCHMARK(BM_PushforwardDirac)->Arg(10)->Arg(50);

void BM_CheckIntegrable(benchmark::State& state) {
  const auto sc = make_presymplectic_scenario(dxdy3(), params(10));
  const auto& gd = sc.smooth.leaves.gd;
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_integrable(sc.d_g, sc.smooth.leaves.params, gd.sampler.arrow));
  }
}
BENCHMARK(BM_CheckIntegrable);

}  // namespace

BENCHMARK_MAIN();
