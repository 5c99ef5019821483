#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "folioid/errors.hpp"
#include "folioid/fingroupoid.hpp"
#include "folioid/rng.hpp"

using namespace folioid;

namespace {

int pair_id(int n, int i, int j) { return i * n + j; }

ArrowSet block_subgroupoid() {
  ArrowSet n;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i / 2 == j / 2) n.push_back(pair_id(4, i, j));
  return n;
}

std::vector<std::pair<int, int>> block_relation() {
  std::vector<std::pair<int, int>> r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i / 2 == j / 2) r.emplace_back(i, j);
  return r;
}

NormalSubgroupoidSystem basegp_nss(const FiniteGroupoid& g) {
  // theta((m, n), (n, j)N) = (m, j)N
  return make_nss(g, block_subgroupoid(), block_relation(),
                  [](int p, int, int a) { return pair_id(4, p, a % 4); });
}

// Z/4 x {a, b}: arrow id = 2k + x, object x.
FiniteGroupoid vb_groupoid() { return product(cyclic_group(4), discrete_groupoid(2)); }

NormalSubgroupoidSystem vb_nss(const FiniteGroupoid& g, bool full_relation) {
  std::vector<std::pair<int, int>> r = {{0, 0}, {1, 1}};
  if (full_relation) {
    r.emplace_back(0, 1);
    r.emplace_back(1, 0);
  }
  // theta((p, q), (k, q)N) = (k, p)N
  return make_nss(g, {0, 1, 4, 5}, r, [](int p, int, int a) { return 2 * (a / 2) + p; });
}

// S3 as permutations of {0,1,2}, for a non-normal subgroup.
FiniteGroupoid symmetric_group3() {
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p = {0, 1, 2};
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  auto index = [&](const std::array<int, 3>& q) {
    return static_cast<int>(std::find(perms.begin(), perms.end(), q) - perms.begin());
  };
  const int n = static_cast<int>(perms.size());
  std::vector<int> inv(n);
  std::vector<std::array<int, 3>> table;
  for (int a = 0; a < n; ++a) {
    std::array<int, 3> ia{};
    for (int k = 0; k < 3; ++k) ia[perms[a][k]] = k;
    inv[a] = index(ia);
    for (int b = 0; b < n; ++b) {
      std::array<int, 3> ab{};
      for (int k = 0; k < 3; ++k) ab[k] = perms[a][perms[b][k]];
      table.push_back({a, b, index(ab)});
    }
  }
  return FiniteGroupoid(1, std::vector<int>(n, 0), std::vector<int>(n, 0), {index({0, 1, 2})},
                        inv, table);
}

// Oracle: number of classes {n1 g n2}, enumerated as explicit sets.
int brute_force_class_count(const FiniteGroupoid& g, const ArrowSet& n) {
  std::set<std::set<int>> classes;
  for (int a = 0; a < g.num_arrows(); ++a) {
    std::set<int> cls;
    for (int n1 : n)
      for (int n2 : n)
        if (g.src(n1) == g.tgt(a) && g.tgt(n2) == g.src(a)) cls.insert(g.mul(g.mul(n1, a), n2));
    classes.insert(cls);
  }
  return static_cast<int>(classes.size());
}

}  // namespace

TEST(ValidateGroupoid, PairGroupoidIsValid) {
  const auto g = pair_groupoid(3);
  EXPECT_EQ(g.num_arrows(), 9);
  EXPECT_TRUE(validate_groupoid(g).valid());
}

TEST(ValidateGroupoid, CorruptedInverseIsWitnessed) {
  const auto g = pair_groupoid(3);
  auto inv = g.inv_table();
  inv[pair_id(3, 0, 1)] = pair_id(3, 0, 1);
  const auto rep = validate_groupoid(g.with_inverse(inv));
  ASSERT_FALSE(rep.valid());
  EXPECT_TRUE(rep.has("(v) inverse"));
  bool found = false;
  for (const auto& v : rep.violations)
    if (v.axiom == "(v) inverse" && v.witness["g"] == pair_id(3, 0, 1)) found = true;
  EXPECT_TRUE(found);
}

TEST(ValidateGroupoid, CyclicGroupIsValid) {
  EXPECT_TRUE(validate_groupoid(cyclic_group(3)).valid());
  EXPECT_TRUE(validate_groupoid(symmetric_group3()).valid());
  EXPECT_TRUE(validate_groupoid(vb_groupoid()).valid());
}

TEST(ValidateGroupoid, OutOfRangeIdIsStructural) {
  EXPECT_THROW(FiniteGroupoid(1, {0}, {0}, {0}, {3}, {{0, 0, 0}}), StructuralError);
  EXPECT_THROW(FiniteGroupoid(1, {0}, {0}, {0}, {0}, {}), StructuralError);
}

TEST(ValidateGroupoid, NonComposableQueryThrows) {
  const auto g = pair_groupoid(2);
  EXPECT_THROW(g.mul(pair_id(2, 0, 0), pair_id(2, 1, 1)), NotComposable);
}

TEST(Normality, Examples) {
  const auto g = pair_groupoid(4);
  EXPECT_TRUE(is_normal_subgroupoid(g, block_subgroupoid()).normal);
  EXPECT_TRUE(is_normal_subgroupoid(g, g.unit_table()).normal);
  EXPECT_TRUE(is_normal_subgroupoid(cyclic_group(2), {0}).normal);
}

TEST(Normality, NonNormalSubgroupHasWitness) {
  const auto s3 = symmetric_group3();
  // {id, (0 1)}: id is perm 0, (0 1) swaps the first two entries.
  int swap01 = -1;
  for (int a = 0; a < 6; ++a)
    if (s3.mul(a, a) == s3.unit(0) && a != s3.unit(0) && swap01 < 0) swap01 = a;
  const auto res = is_normal_subgroupoid(s3, {s3.unit(0), swap01});
  EXPECT_FALSE(res.normal);
  ASSERT_TRUE(res.witness.has_value());
}

TEST(Normality, NonWideSubsetIsPrecondition) {
  const auto g = pair_groupoid(3);
  EXPECT_THROW(is_normal_subgroupoid(g, {pair_id(3, 0, 0)}), PreconditionError);
  // not closed under inversion
  EXPECT_THROW(is_normal_subgroupoid(g, {0, 4, 8, pair_id(3, 0, 1)}), PreconditionError);
}

TEST(QuotientByNormal, BlockSubgroupoidGivesPairOnTwo) {
  const auto g = pair_groupoid(4);
  const auto q = quotient_by_normal_subgroupoid(g, block_subgroupoid());
  EXPECT_EQ(q.quotient.num_arrows(), brute_force_class_count(g, block_subgroupoid()));
  EXPECT_EQ(q.quotient.num_objects(), 2);
  EXPECT_TRUE(find_isomorphism(q.quotient, pair_groupoid(2)).has_value());
}

TEST(QuotientByNormal, UnitsGiveTheSameGroupoid) {
  const auto g = vb_groupoid();
  const auto q = quotient_by_normal_subgroupoid(g, g.unit_table());
  EXPECT_TRUE(find_isomorphism(q.quotient, g).has_value());
}

TEST(QuotientByNormal, CyclicByTwo) {
  const auto g = cyclic_group(4);
  const auto q = quotient_by_normal_subgroupoid(g, {0, 2});
  EXPECT_EQ(q.quotient.num_arrows(), brute_force_class_count(g, {0, 2}));
  EXPECT_TRUE(find_isomorphism(q.quotient, cyclic_group(2)).has_value());
  EXPECT_FALSE(find_isomorphism(q.quotient, discrete_groupoid(2)).has_value());
}

TEST(Kernel, Examples) {
  const auto g = pair_groupoid(4);
  const auto target = pair_groupoid(2);
  std::vector<int> arrows(16);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) arrows[pair_id(4, i, j)] = pair_id(2, i / 2, j / 2);
  const FiniteMorphism proj{g, target, arrows, {0, 0, 1, 1}};
  EXPECT_EQ(kernel_of_morphism(proj), block_subgroupoid());

  std::vector<int> ids(16);
  for (int a = 0; a < 16; ++a) ids[a] = a;
  EXPECT_EQ(kernel_of_morphism(FiniteMorphism{g, g, ids, {0, 1, 2, 3}}), g.unit_table());

  const FiniteMorphism reduce{cyclic_group(4), cyclic_group(2), {0, 1, 0, 1}, {0}};
  EXPECT_EQ(kernel_of_morphism(reduce), (ArrowSet{0, 2}));
}

TEST(Kernel, InvalidMorphismIsRejected) {
  const FiniteMorphism bad{cyclic_group(4), cyclic_group(2), {0, 1, 1, 1}, {0}};
  EXPECT_THROW(kernel_of_morphism(bad), PreconditionError);
}

TEST(Nss, BasegpAnalogIsValid) {
  const auto g = pair_groupoid(4);
  EXPECT_TRUE(validate_nss(g, basegp_nss(g)).valid());
}

TEST(Nss, VbAnalogIsValid) {
  const auto g = vb_groupoid();
  EXPECT_TRUE(validate_nss(g, vb_nss(g, true)).valid());
  EXPECT_TRUE(validate_nss(g, vb_nss(g, false)).valid());
}

TEST(Nss, ConditionTwoMutationIsWitnessed) {
  const auto g = pair_groupoid(4);
  auto nss = basegp_nss(g);
  // Send 1_1 N (at p=0) to the coset of (0,2) instead of (0,0)N, consistently
  // for every representative of 1_1 N.
  for (auto& [key, h] : nss.theta) {
    const auto [p, q, a] = key;
    if (p == 0 && q == 1 && a % 4 < 2) h = pair_id(4, 0, 2 + a % 4);
  }
  const auto rep = validate_nss(g, nss);
  EXPECT_TRUE(rep.has("condition 2"));
}

TEST(Nss, RepresentativeDependenceIsDistinctError) {
  const auto g = pair_groupoid(4);
  auto nss = basegp_nss(g);
  nss.theta[{0, 1, pair_id(4, 1, 1)}] = pair_id(4, 0, 2);
  EXPECT_THROW(validate_nss(g, nss), ThetaNotWellDefined);
}

TEST(Nss, RelationMustBeEquivalence) {
  const auto g = pair_groupoid(4);
  auto nss = basegp_nss(g);
  nss.relation.pop_back();
  EXPECT_THROW(validate_nss(g, nss), PreconditionError);
}

TEST(QuotientByNss, BasegpAgreesWithNormalQuotient) {
  const auto g = pair_groupoid(4);
  const auto a = quotient_by_nss(g, basegp_nss(g));
  const auto b = quotient_by_normal_subgroupoid(g, block_subgroupoid());
  EXPECT_TRUE(find_isomorphism(a.quotient, pair_groupoid(2)).has_value());
  EXPECT_TRUE(find_isomorphism(a.quotient, b.quotient).has_value());
  EXPECT_TRUE(validate_morphism(a.projection).valid());
}

TEST(QuotientByNss, VbIsStrictlyCoarser) {
  const auto g = vb_groupoid();
  const auto a = quotient_by_nss(g, vb_nss(g, true));
  const auto b = quotient_by_normal_subgroupoid(g, {0, 1, 4, 5});
  EXPECT_TRUE(find_isomorphism(a.quotient, cyclic_group(2)).has_value());
  EXPECT_TRUE(find_isomorphism(b.quotient, product(cyclic_group(2), discrete_groupoid(2))));
  EXPECT_FALSE(find_isomorphism(a.quotient, b.quotient).has_value());
}

TEST(QuotientByNss, DiagonalRelationRecoversNormalQuotient) {
  const auto g = vb_groupoid();
  const auto a = quotient_by_nss(g, vb_nss(g, false));
  const auto b = quotient_by_normal_subgroupoid(g, {0, 1, 4, 5});
  EXPECT_TRUE(find_isomorphism(a.quotient, b.quotient).has_value());
}

TEST(QuotientByNss, TrivialSystemIsIdentity) {
  const auto g = pair_groupoid(3);
  std::vector<std::pair<int, int>> diag = {{0, 0}, {1, 1}, {2, 2}};
  const auto nss = make_nss(g, g.unit_table(), diag, [](int, int, int a) { return a; });
  EXPECT_TRUE(find_isomorphism(quotient_by_nss(g, nss).quotient, g).has_value());
}

TEST(Isomorphism, DistinguishesSmallGroupoids) {
  EXPECT_FALSE(find_isomorphism(cyclic_group(4), product(cyclic_group(2), cyclic_group(2))));
  EXPECT_TRUE(find_isomorphism(product(cyclic_group(2), cyclic_group(3)), cyclic_group(6)));
  EXPECT_FALSE(find_isomorphism(pair_groupoid(2), product(cyclic_group(2), discrete_groupoid(2))));
}

TEST(Json, RoundTrip) {
  const auto g = vb_groupoid();
  const auto back = groupoid_from_json(to_json(g));
  EXPECT_EQ(to_json(back), to_json(g));
  const auto nss = vb_nss(g, true);
  EXPECT_EQ(to_json(nss_from_json(to_json(nss))), to_json(nss));
}

TEST(Json, MalformedTableIsStructural) {
  Json j = to_json(cyclic_group(2));
  j["src"] = {0, 5};
  EXPECT_THROW(groupoid_from_json(j), StructuralError);
  j.erase("src");
  EXPECT_THROW(groupoid_from_json(j), StructuralError);
}

namespace {

// Pair(n) x Z/m with arrow ((i, j), k) at id (i*n + j)*m + k.
struct PairCyclic {
  int n, m;
  FiniteGroupoid g;
  PairCyclic(int n_, int m_) : n(n_), m(m_), g(product(pair_groupoid(n_), cyclic_group(m_))) {}
  int id(int i, int j, int k) const { return (i * n + j) * m + k; }
};

}  // namespace

TEST(KernelProperty, RandomMorphismsHaveNormalKernels) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    const PairCyclic a(1 + static_cast<int>(rng.index(3)), 1 + static_cast<int>(rng.index(4)));
    const PairCyclic b(1 + static_cast<int>(rng.index(3)), 1 + static_cast<int>(rng.index(4)));
    // Object map, group homomorphism k -> mult*k (needs m_a*mult = 0 mod m_b)
    // and a coboundary twist c(i) - c(j).
    std::vector<int> phi(a.n), c(a.n);
    for (int i = 0; i < a.n; ++i) {
      phi[i] = static_cast<int>(rng.index(b.n));
      c[i] = static_cast<int>(rng.index(b.m));
    }
    std::vector<int> mults;
    for (int t = 0; t < b.m; ++t)
      if ((a.m * t) % b.m == 0) mults.push_back(t);
    const int mult = mults[rng.index(mults.size())];
    std::vector<int> arrows(a.g.num_arrows());
    for (int i = 0; i < a.n; ++i)
      for (int j = 0; j < a.n; ++j)
        for (int k = 0; k < a.m; ++k) {
          const int kk = (((mult * k + c[i] - c[j]) % b.m) + b.m) % b.m;
          arrows[a.id(i, j, k)] = b.id(phi[i], phi[j], kk);
        }
    const FiniteMorphism f{a.g, b.g, arrows, phi};
    ASSERT_TRUE(validate_morphism(f).valid());
    const ArrowSet k = kernel_of_morphism(f);
    EXPECT_TRUE(is_normal_subgroupoid(a.g, k).normal);
    // The kernel system is a valid system whose quotient projection is a morphism.
    // Only fibrations carry a kernel system.
    NormalSubgroupoidSystem sys;
    try {
      sys = kernel_system(f);
    } catch (const PreconditionError&) {
      continue;
    }
    EXPECT_TRUE(validate_nss(a.g, sys).valid());
    EXPECT_TRUE(validate_morphism(quotient_by_nss(a.g, sys).projection).valid());
  }
}

TEST(AxiomProperty, ProductsOfValidGroupoidsAreValid) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = product(pair_groupoid(1 + static_cast<int>(rng.index(3))),
                           cyclic_group(1 + static_cast<int>(rng.index(4))));
    EXPECT_TRUE(validate_groupoid(g).valid());
  }
}
