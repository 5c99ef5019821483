#include "folioid/scenarios.hpp"

#include <algorithm>
#include <string>

#include "folioid/errors.hpp"
#include "folioid/rng.hpp"

namespace folioid {

using linalg::concat;

namespace {

// Columns ordered by the index of their largest-magnitude entry, that entry
// made positive.
Mat normalize_signs(Mat b) {
  std::vector<std::pair<Eigen::Index, int>> order;
  for (int c = 0; c < b.cols(); ++c) {
    Eigen::Index at = 0;
    b.col(c).cwiseAbs().maxCoeff(&at);
    if (b(at, c) < 0) b.col(c) *= -1.0;
    order.emplace_back(at, c);
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  Mat out(b.rows(), b.cols());
  for (int c = 0; c < b.cols(); ++c) out.col(c) = b.col(order[static_cast<std::size_t>(c)].second);
  return out;
}

Mat as_matrix(const std::vector<Vec>& cols, int n) {
  Mat m(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i].size() != n) {
      throw StructuralError("basis vector of dimension " + std::to_string(cols[i].size()) +
                            " in R^" + std::to_string(n));
    }
    m.col(static_cast<Eigen::Index>(i)) = cols[i];
  }
  return m;
}

Mat block_diag(const Mat& a, const Mat& b) {
  Mat out = Mat::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

Distribution constant_distribution(const ChartManifold& base, const std::vector<Vec>& cols) {
  Distribution d;
  d.base = base;
  for (const auto& c : cols) d.gens.push_back(VectorField::constant(base, c));
  return d;
}

SmoothMap linear_map(const ChartManifold& from, int out_dim, const Mat& a) {
  return SmoothMap(
      from, ChartManifold::euclidean(out_dim), [a](const Vec& x) { return Vec(a * x); },
      [a](const Vec&) { return a; });
}

}  // namespace

Mat complement_basis(const std::vector<Vec>& cols, int n, double tol_rank) {
  if (cols.empty()) return Mat::Identity(n, n);
  return normalize_signs(linalg::null_space(as_matrix(cols, n).transpose(), tol_rank));
}

Mat span_basis(const std::vector<Vec>& cols, int n, double tol_rank) {
  if (cols.empty()) return Mat(n, 0);
  return normalize_signs(linalg::range_basis(as_matrix(cols, n), tol_rank));
}

SmoothScenario make_pair_scenario(int m, const std::vector<Vec>& d_basis,
                                  const NumericParams& params) {
  const auto man = ChartManifold::euclidean(m);
  const Mat dspan = span_basis(d_basis, m);
  const int r = static_cast<int>(dspan.cols());
  if (r >= m) throw PreconditionError("pair scenario: D must be a proper subspace");
  const Mat q = complement_basis(d_basis, m);
  std::vector<Vec> dcols;
  for (int c = 0; c < r; ++c) dcols.push_back(dspan.col(c));

  SmoothScenario sc;
  sc.family = "pair";
  auto& ls = sc.leaves;
  ls.gd = pair_lie_groupoid(man, params.sample_radius);
  ls.gd.tol_comp = params.tol_comp;
  ls.params = params;
  Distribution d = constant_distribution(man, dcols);
  d.tol_rank = params.tol_rank;
  d.rank = r;
  ls.s = product_distribution(d, d);
  const Mat qt = q.transpose();
  ls.chart.lambda_g = linear_map(ls.gd.arrows, 2 * (m - r), block_diag(qt, qt));
  ls.chart.lambda_p = linear_map(man, m - r, qt);
  sc.quotient = pair_lie_groupoid(ChartManifold::euclidean(m - r), params.sample_radius);
  sc.complete_fields = ls.s.gens;
  sc.complete_base_fields = d.gens;
  return sc;
}

SmoothScenario make_vb_scenario(int k, const std::vector<Vec>& w_basis, int m,
                                const std::vector<Vec>& f_basis, const NumericParams& params) {
  const auto man = ChartManifold::euclidean(m);
  const Mat wspan = span_basis(w_basis, k);
  const Mat fspan = span_basis(f_basis, m);
  const int rw = static_cast<int>(wspan.cols());
  const int rf = static_cast<int>(fspan.cols());
  if (rw >= k || rf >= m) throw PreconditionError("vb scenario: W and F must be proper subspaces");

  SmoothScenario sc;
  sc.family = "vb_trivial";
  auto& ls = sc.leaves;
  ls.gd = vb_trivial_groupoid(k, man, params.sample_radius);
  ls.gd.tol_comp = params.tol_comp;
  ls.params = params;
  std::vector<Vec> gens;
  for (int c = 0; c < rw; ++c) gens.push_back(concat(wspan.col(c), Vec::Zero(m)));
  for (int c = 0; c < rf; ++c) gens.push_back(concat(Vec::Zero(k), fspan.col(c)));
  ls.s = constant_distribution(ls.gd.arrows, gens);
  ls.s.tol_rank = params.tol_rank;
  ls.s.rank = rw + rf;
  const Mat qw = complement_basis(w_basis, k).transpose();
  const Mat qf = complement_basis(f_basis, m).transpose();
  ls.chart.lambda_g = linear_map(ls.gd.arrows, (k - rw) + (m - rf), block_diag(qw, qf));
  ls.chart.lambda_p = linear_map(man, m - rf, qf);
  sc.quotient =
      vb_trivial_groupoid(k - rw, ChartManifold::euclidean(m - rf), params.sample_radius);
  sc.complete_fields = ls.s.gens;
  std::vector<Vec> fcols;
  for (int c = 0; c < rf; ++c) fcols.push_back(fspan.col(c));
  sc.complete_base_fields = constant_distribution(man, fcols).gens;
  return sc;
}

SmoothScenario make_group_action_scenario(int m, const Vec& direction,
                                          const NumericParams& params) {
  if (direction.size() != m || direction.norm() == 0.0) {
    throw PreconditionError("group action scenario: direction must be a nonzero vector of R^m");
  }
  const auto man = ChartManifold::euclidean(m);
  SmoothScenario sc;
  sc.family = "group_action_pair";
  auto& ls = sc.leaves;
  ls.gd = pair_lie_groupoid(man, params.sample_radius);
  ls.gd.tol_comp = params.tol_comp;
  ls.params = params;
  ls.s = constant_distribution(ls.gd.arrows, {concat(direction, direction)});
  ls.s.tol_rank = params.tol_rank;
  ls.s.rank = 1;
  // Invariants of the diagonal translation: complement coordinates of both
  // factors and the relative position along the direction.
  const Mat qt = complement_basis({direction}, m).transpose();
  Mat lam = Mat::Zero(2 * (m - 1) + 1, 2 * m);
  lam.topRows(2 * (m - 1)) = block_diag(qt, qt);
  const Vec along = direction / direction.squaredNorm();
  lam.bottomRows(1) << along.transpose(), -along.transpose();
  ls.chart.lambda_g = linear_map(ls.gd.arrows, 2 * (m - 1) + 1, lam);
  ls.chart.lambda_p = linear_map(man, m - 1, qt);
  sc.quotient = gauge_translation_groupoid(m - 1, params.sample_radius);
  sc.complete_fields = ls.s.gens;
  sc.complete_base_fields = {VectorField::constant(man, direction)};
  return sc;
}

SmoothGroupoid gauge_translation_groupoid(int d, double sample_radius) {
  const auto base = ChartManifold::euclidean(d);
  const auto arrows = ChartManifold::euclidean(2 * d + 1);
  const auto pairs = ChartManifold::euclidean(4 * d + 2);
  const int n = 2 * d + 1;
  SmoothGroupoid out;
  out.name = "gauge_translation";
  out.arrows = arrows;
  out.objects = base;
  out.t = SmoothMap(arrows, base, [d](const Vec& x) { return Vec(x.head(d)); });
  out.s = SmoothMap(arrows, base, [d](const Vec& x) { return Vec(x.segment(d, d)); });
  out.eps = SmoothMap(base, arrows, [](const Vec& p) {
    return concat(concat(p, p), Vec::Zero(1));
  });
  out.inv = SmoothMap(arrows, arrows, [d](const Vec& x) {
    Vec y(x.size());
    y << x.segment(d, d), x.head(d), -x[2 * d];
    return y;
  });
  out.mul = SmoothMap(pairs, arrows, [d, n](const Vec& z) {
    Vec y(n);
    y << z.head(d), z.segment(n + d, d), z[2 * d] + z[n + 2 * d];
    return y;
  });
  out.sampler.arrow = [arrows, sample_radius](Rng& rng) {
    return sample_in_box(arrows, rng, sample_radius);
  };
  out.sampler.object = [base, sample_radius](Rng& rng) {
    return sample_in_box(base, rng, sample_radius);
  };
  out.sampler.arrow_with_target = [d, sample_radius](Rng& rng, const Vec& p) {
    return concat(p, rng.uniform_vec(d + 1, -sample_radius, sample_radius));
  };
  return out;
}

DiracScenario make_presymplectic_scenario(const Mat& omega, const NumericParams& params,
                                          int weight_coordinate) {
  const int m = static_cast<int>(omega.rows());
  if (omega.cols() != m || (omega + omega.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw PreconditionError("presymplectic scenario: omega must be a square antisymmetric matrix");
  }
  if (weight_coordinate >= m) {
    throw PreconditionError("presymplectic scenario: weight coordinate out of range");
  }
  const Mat ker = linalg::null_space(omega, params.tol_rank);
  if (ker.cols() == 0) throw PreconditionError("presymplectic scenario: omega is nondegenerate");
  std::vector<Vec> kcols;
  for (int c = 0; c < ker.cols(); ++c) kcols.push_back(ker.col(c));

  DiracScenario sc;
  sc.smooth = make_pair_scenario(m, kcols, params);
  sc.smooth.family = "presymplectic_pair_dirac";
  sc.omega = omega;
  const auto man = ChartManifold::euclidean(m);
  if (weight_coordinate < 0) {
    sc.d_m = from_two_form(man, [omega](const Vec&) { return omega; });
  } else {
    sc.d_m = from_two_form(man, [omega, weight_coordinate](const Vec& x) {
      return Mat(x[weight_coordinate] * omega);
    });
  }
  sc.d_g = minus_double(sc.d_m);
  return sc;
}

namespace {

int pair_id(int i, int j) { return 4 * i + j; }

}  // namespace

FiniteScenario make_finite_pair4() {
  FiniteScenario sc{"pair4", pair_groupoid(4), {}, std::nullopt};
  std::vector<std::pair<int, int>> relation;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (i / 2 == j / 2) {
        sc.normal.push_back(pair_id(i, j));
        relation.emplace_back(i, j);
      }
    }
  }
  // theta((p, q), (q, j) N) = (p, j) N
  sc.nss = make_nss(sc.groupoid, sc.normal, relation,
                    [](int p, int, int a) { return pair_id(p, a % 4); });
  return sc;
}

FiniteScenario make_finite_z4_bundle(bool full_relation) {
  // Z/4 x {a, b}: arrow id 2k + x over object x; N = {0, 2} x {a, b}.
  FiniteScenario sc{"z4_bundle", product(cyclic_group(4), discrete_groupoid(2)), {0, 1, 4, 5},
                    std::nullopt};
  std::vector<std::pair<int, int>> relation = {{0, 0}, {1, 1}};
  if (full_relation) {
    relation.emplace_back(0, 1);
    relation.emplace_back(1, 0);
  }
  // theta((p, q), (k, q) N) = (k, p) N
  sc.nss = make_nss(sc.groupoid, sc.normal, relation,
                    [](int p, int, int a) { return 2 * (a / 2) + p; });
  return sc;
}

}  // namespace folioid
