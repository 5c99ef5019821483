#include "folioid/dirac.hpp"

#include <cmath>
#include <string>

#include <Eigen/LU>

#include "folioid/errors.hpp"
#include "folioid/rng.hpp"

namespace folioid {

using linalg::concat;
using linalg::hstack;
using linalg::max_principal_angle;
using linalg::min_norm_solve;
using linalg::null_space;
using linalg::numerical_rank;
using linalg::range_basis;
using linalg::relative_distance_to_span;
using linalg::vstack;

namespace {

Mat span_of(const Mat& m, int rows, double tol) {
  if (m.cols() == 0) return Mat(rows, 0);
  return range_basis(m, tol);
}

// a . kernel, or an empty block when the kernel is trivial.
Mat image_of_kernel(const Mat& a, const Mat& kernel_of, double tol) {
  const Mat k = null_space(kernel_of, tol);
  if (k.cols() == 0) return Mat(a.rows(), 0);
  return span_of(a * k, static_cast<int>(a.rows()), tol);
}

// Symmetric pairing matrix on R^n + R^n.
Mat pairing_matrix(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Mat::Identity(n, n);
  j.bottomLeftCorner(n, n) = Mat::Identity(n, n);
  return j;
}

}  // namespace

double pontryagin_pairing(const Vec& v, const Vec& a, const Vec& w, const Vec& b) {
  if (v.size() != a.size() || w.size() != b.size() || v.size() != w.size()) {
    throw StructuralError("pontryagin_pairing: dimension mismatch");
  }
  return a.dot(w) + b.dot(v);
}

Mat DiracStructure::generator_matrix(const Vec& x) const {
  const int n = dim();
  Mat m(2 * n, static_cast<Eigen::Index>(gens.size()));
  for (std::size_t i = 0; i < gens.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = concat(gens[i].first(x), gens[i].second(x));
  }
  return m;
}

Mat dirac_fiber(const DiracStructure& d, const Vec& x, double tol_rank) {
  const Mat g = d.generator_matrix(x);
  if (!g.allFinite()) throw NumericalBlowup("dirac_fiber: non-finite generator value");
  return span_of(g, 2 * d.dim(), tol_rank);
}

PoissonBivector constant_poisson(const ChartManifold& base, const Mat& pi) {
  return {base, [pi](const Vec&) { return pi; }};
}

double jacobi_residual(const PoissonBivector& pi, const Vec& x, double h) {
  const Mat p = pi.matrix(x);
  const int n = static_cast<int>(p.rows());
  std::vector<Mat> dp(static_cast<std::size_t>(n));
  Vec xp = x;
  Vec xm = x;
  for (int l = 0; l < n; ++l) {
    xp[l] = x[l] + h;
    xm[l] = x[l] - h;
    dp[static_cast<std::size_t>(l)] = (pi.matrix(xp) - pi.matrix(xm)) / (2.0 * h);
    xp[l] = x[l];
    xm[l] = x[l];
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l) {
          const auto& d = dp[static_cast<std::size_t>(l)];
          sum += p(i, l) * d(j, k) + p(j, l) * d(k, i) + p(k, l) * d(i, j);
        }
        worst = std::max(worst, std::abs(sum));
      }
    }
  }
  if (!std::isfinite(worst)) throw NumericalBlowup("jacobi_residual: non-finite value");
  return worst;
}

DiracStructure from_two_form(const ChartManifold& base, std::function<Mat(const Vec&)> omega) {
  DiracStructure d;
  d.base = base;
  const int n = base.dim();
  for (int i = 0; i < n; ++i) {
    d.gens.emplace_back(VectorField::constant(base, Vec::Unit(n, i)),
                        OneForm(base, [omega, i](const Vec& x) {
                          // i_{e_i} omega = omega(e_i, .) = row i of Omega
                          return Vec(omega(x).row(i).transpose());
                        }));
  }
  return d;
}

DiracStructure from_poisson(const PoissonBivector& pi) {
  DiracStructure d;
  d.base = pi.base;
  const int n = pi.base.dim();
  for (int i = 0; i < n; ++i) {
    d.gens.emplace_back(VectorField(pi.base,
                                    [m = pi.matrix, i](const Vec& x) {
                                      // pi#(e_i) = Pi^T e_i
                                      return Vec(m(x).row(i).transpose());
                                    }),
                        OneForm::constant(pi.base, Vec::Unit(n, i)));
  }
  return d;
}

DiracStructure tangent_dirac(const ChartManifold& base) {
  DiracStructure d;
  d.base = base;
  const int n = base.dim();
  for (int i = 0; i < n; ++i) {
    d.gens.emplace_back(VectorField::constant(base, Vec::Unit(n, i)), OneForm::zero(base));
  }
  return d;
}

DiracStructure minus_double(const DiracStructure& d) {
  DiracStructure out;
  out.base = ChartManifold::product(d.base, d.base);
  const int n = d.dim();
  for (const auto& [x, a] : d.gens) {
    out.gens.emplace_back(
        VectorField(out.base, [x, n](const Vec& p) { return concat(x(p.head(n)), Vec::Zero(n)); }),
        OneForm(out.base, [a, n](const Vec& p) { return concat(a(p.head(n)), Vec::Zero(n)); }));
  }
  for (const auto& [x, a] : d.gens) {
    out.gens.emplace_back(
        VectorField(out.base,
                    [x, n](const Vec& p) { return concat(Vec::Zero(n), Vec(-x(p.tail(n)))); }),
        OneForm(out.base, [a, n](const Vec& p) { return concat(Vec::Zero(n), a(p.tail(n))); }));
  }
  return out;
}

CheckReport check_lagrangian(const DiracStructure& d, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample) {
  CheckReport rep;
  rep.name = "check_lagrangian";
  rep.tolerance = params.tol_dirac;
  rep.samples = params.samples;
  Rng rng(params.seed + 20);
  const int n = d.dim();
  const Mat j = pairing_matrix(n);
  for (int k = 0; k < params.samples; ++k) {
    const Vec x = sample(rng);
    const Mat g = d.generator_matrix(x);
    const Mat pairings = g.transpose() * j * g;
    rep.record(pairings.cwiseAbs().maxCoeff(), [&] {
      return Json{{"check", "isotropic"}, {"x", to_json(x)}, {"pairings", to_json(pairings)}};
    });
    const int r = numerical_rank(g, params.tol_rank);
    if (r != n) rep.fail({{"check", "fiber rank"}, {"x", to_json(x)}, {"rank", r}, {"dim", n}});
  }
  return rep;
}

CharacteristicSpaces characteristic_spaces(const DiracStructure& d, const Vec& x,
                                           double tol_rank) {
  const int n = d.dim();
  const Mat f = dirac_fiber(d, x, tol_rank);
  const Mat v = f.topRows(n);
  const Mat a = f.bottomRows(n);
  return {image_of_kernel(v, a, tol_rank), span_of(v, n, tol_rank), image_of_kernel(a, v, tol_rank),
          span_of(a, n, tol_rank)};
}

Distribution characteristic_distribution(const DiracStructure& d, const Vec& x0, double tol_rank) {
  Distribution out;
  out.base = d.base;
  out.tol_rank = tol_rank;
  out.rank = static_cast<int>(characteristic_spaces(d, x0, tol_rank).g0.cols());
  for (int i = 0; i < d.dim(); ++i) {
    out.gens.emplace_back(d.base, [d, i, tol_rank](const Vec& x) {
      const Mat g0 = characteristic_spaces(d, x, tol_rank).g0;
      return Vec(g0 * g0.row(i).transpose());
    });
  }
  return out;
}

PontryaginVector courant_bracket(const std::pair<VectorField, OneForm>& e1,
                                 const std::pair<VectorField, OneForm>& e2, const Vec& x,
                                 double h) {
  const auto& [xf, alpha] = e1;
  const auto& [yf, beta] = e2;
  Vec v = lie_bracket(xf, yf, x, h);
  Vec a = lie_derivative_oneform(xf, beta, x, h) - interior_d_oneform(alpha, yf(x), x, h);
  return {std::move(v), std::move(a)};
}

CheckReport check_integrable(const DiracStructure& d, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample) {
  CheckReport rep;
  rep.name = "check_integrable";
  rep.tolerance = params.tol_member;
  rep.samples = params.samples;
  Rng rng(params.seed + 21);
  for (int k = 0; k < params.samples; ++k) {
    const Vec x = sample(rng);
    const Mat f = dirac_fiber(d, x, params.tol_rank);
    for (std::size_t i = 0; i < d.gens.size(); ++i) {
      for (std::size_t j = 0; j < d.gens.size(); ++j) {
        const auto br = courant_bracket(d.gens[i], d.gens[j], x, params.h_fd);
        const Vec stacked = concat(br.v, br.a);
        rep.record(relative_distance_to_span(f, stacked), [&] {
          return Json{{"x", to_json(x)},
                      {"generators", {i, j}},
                      {"bracket_tangent", to_json(br.v)},
                      {"bracket_covector", to_json(br.a)}};
        });
      }
    }
  }
  return rep;
}

CheckReport is_forward_dirac(const SmoothMap& f, const DiracStructure& d_m,
                             const DiracStructure& d_n, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample_m) {
  CheckReport rep;
  rep.name = "is_forward_dirac";
  rep.tolerance = params.tol_dirac;
  rep.samples = params.samples;
  Rng rng(params.seed + 22);
  const int nm = d_m.dim();
  for (int k = 0; k < params.samples; ++k) {
    const Vec m = sample_m(rng);
    const Vec n = f(m);
    const Mat df = f.jacobian(m);
    const Mat fm = dirac_fiber(d_m, m, params.tol_rank);
    const Mat fn = dirac_fiber(d_n, n, params.tol_rank);
    const int nn = d_n.dim();
    // [TF V; A] c = [v_n; TF^* a_n]
    const Mat lhs = vstack(df * fm.topRows(nm), fm.bottomRows(nm));
    for (int c = 0; c < fn.cols(); ++c) {
      const Vec vn = fn.col(c).head(nn);
      const Vec an = fn.col(c).tail(nn);
      const Vec rhs = concat(vn, df.transpose() * an);
      const Vec coeff = min_norm_solve(lhs, rhs, params.tol_rank);
      rep.record((lhs * coeff - rhs).norm(), [&] {
        return Json{{"m", to_json(m)}, {"v_n", to_json(vn)}, {"alpha_n", to_json(an)}};
      });
    }
  }
  return rep;
}

Vec unit_covector(const SmoothGroupoid& gd, const Vec& p, const Vec& a, const Mat& basis) {
  const Mat lhs = vstack(gd.eps.jacobian(p).transpose(), basis.transpose());
  return min_norm_solve(lhs, concat(Vec::Zero(gd.object_dim()), a), 1e-12);
}

namespace {

Mat source_matrix(const SmoothGroupoid& gd, const Vec& g, const Mat& covectors, const Mat& basis) {
  Mat out(basis.cols(), covectors.cols());
  for (int c = 0; c < covectors.cols(); ++c) {
    out.col(c) = cotangent_source(gd, {g, covectors.col(c)}, basis);
  }
  return out;
}

Mat target_matrix(const SmoothGroupoid& gd, const Vec& g, const Mat& covectors, const Mat& basis) {
  Mat out(basis.cols(), covectors.cols());
  for (int c = 0; c < covectors.cols(); ++c) {
    out.col(c) = cotangent_target(gd, {g, covectors.col(c)}, basis);
  }
  return out;
}

}  // namespace

CheckReport check_multiplicative_dirac(const SmoothGroupoid& gd, const DiracStructure& d_g,
                                       const NumericParams& params) {
  CheckReport rep;
  rep.name = "check_multiplicative_dirac";
  rep.tolerance = params.tol_member;
  rep.samples = params.samples;
  Rng rng(params.seed + 23);
  const int n = gd.arrow_dim();
  try {
    for (int k = 0; k < params.samples; ++k) {
      const auto [g, h] = gd.sample_composable(rng);
      const Mat fg = dirac_fiber(d_g, g, params.tol_rank);
      const Mat fh = dirac_fiber(d_g, h, params.tol_rank);
      const Vec p = gd.s(g);
      const Mat basis = algebroid_fiber(gd, p).basis;

      // Source and target images land in the units of D_G.
      auto check_base = [&](const Vec& arrow, const Mat& fiber, bool source) {
        const Vec q = source ? gd.s(arrow) : gd.t(arrow);
        const Mat b = algebroid_fiber(gd, q).basis;
        const Mat unit_fiber = dirac_fiber(d_g, gd.eps(q), params.tol_rank);
        const Mat d = source ? gd.s.jacobian(arrow) : gd.t.jacobian(arrow);
        for (int c = 0; c < fiber.cols(); ++c) {
          const Vec v = fiber.col(c).head(n);
          const CotangentArrow alpha{arrow, fiber.col(c).tail(n)};
          const Vec a = source ? cotangent_source(gd, alpha, b) : cotangent_target(gd, alpha, b);
          const Vec unit = concat(gd.eps.jacobian(q) * (d * v), unit_covector(gd, q, a, b));
          rep.record(relative_distance_to_span(unit_fiber, unit), [&] {
            return Json{{"check", source ? "source in base" : "target in base"},
                        {"g", to_json(arrow)}};
          });
        }
      };
      check_base(g, fg, true);
      check_base(g, fg, false);

      // Composable pairs (c, d): Ts v_g = Tt v_h and s^(a_g) = t^(a_h).
      const Mat vg = fg.topRows(n);
      const Mat ag = fg.bottomRows(n);
      const Mat vh = fh.topRows(n);
      const Mat ah = fh.bottomRows(n);
      const Mat top = hstack(gd.s.jacobian(g) * vg, -gd.t.jacobian(h) * vh);
      const Mat bottom =
          hstack(source_matrix(gd, g, ag, basis), -target_matrix(gd, h, ah, basis));
      const Mat pairs = null_space(vstack(top, bottom), params.tol_rank);
      const Vec gh = gd.multiply(g, h);
      const Mat fgh = dirac_fiber(d_g, gh, params.tol_rank);
      for (int c = 0; c < pairs.cols(); ++c) {
        const Vec cg = pairs.col(c).head(fg.cols());
        const Vec ch = pairs.col(c).tail(fh.cols());
        const auto tv = tangent_mul(gd, {g, vg * cg}, {h, vh * ch}, 1e-6);
        const auto ca = cotangent_mul(gd, {g, ag * cg}, {h, ah * ch}, 1e-6);
        const Vec prod = concat(tv.v, ca.alpha);
        rep.record(relative_distance_to_span(fgh, prod), [&] {
          return Json{{"check", "product in D_G"}, {"g", to_json(g)}, {"h", to_json(h)}};
        });
      }
    }
    const Distribution g0 = characteristic_distribution(d_g, gd.sampler.arrow(rng), params.tol_rank);
    const auto g0_rep = check_multiplicative(gd, g0, params);
    rep.details["g0_rank"] = g0.rank;
    rep.details["g0_multiplicative"] = g0_rep.pass;
    if (!g0_rep.pass) rep.fail({{"check", "G0 multiplicative"}, {"report", g0_rep.to_json()}});
  } catch (const RankDrift& e) {
    rep.fail({{"error", "RankDrift"}, {"message", e.what()}, {"location", e.location()}});
  }
  return rep;
}

Vec label_section(const SmoothMap& lambda, const Vec& q, const Vec& x0, double tol) {
  Vec x = x0;
  for (int it = 0; it < 50; ++it) {
    const Vec r = q - lambda(x);
    if (r.norm() <= tol) return x;
    x += min_norm_solve(lambda.jacobian(x), r, 1e-12);
  }
  const double miss = (q - lambda(x)).norm();
  if (!(miss <= 1e3 * tol)) {
    throw PreconditionError("label_section: no point with the requested label (miss " +
                            std::to_string(miss) + ")");
  }
  return x;
}

std::optional<Mat> poisson_from_fiber(const Mat& fiber, double tol_rank) {
  const int n = static_cast<int>(fiber.rows() / 2);
  if (fiber.cols() != n) return std::nullopt;
  const Mat t = fiber.topRows(n);
  const Mat c = fiber.bottomRows(n);
  if (numerical_rank(c, tol_rank) < n) return std::nullopt;
  // columns (Pi^T a, a): Pi^T = T C^-1
  const Mat pit = t * c.inverse();
  return Mat(pit.transpose());
}

namespace {

Mat pushforward_fiber_at(const DiracStructure& d_g, const SmoothMap& lambda, const Vec& g,
                         double tol_rank) {
  const int n = d_g.dim();
  const int nq = lambda.codomain().dim();
  const Mat f = dirac_fiber(d_g, g, tol_rank);
  const Mat lam = lambda.jacobian(g);
  // (c, a) with A c = Lambda^T a; image (Lambda V c, a)
  const Mat kernel = null_space(hstack(f.bottomRows(n), -lam.transpose()), tol_rank);
  if (kernel.cols() == 0) return Mat(2 * nq, 0);
  const Mat image =
      vstack(lam * f.topRows(n) * kernel.topRows(f.cols()), kernel.bottomRows(nq));
  return span_of(image, 2 * nq, tol_rank);
}

}  // namespace

PushforwardResult pushforward_dirac(const DiracStructure& d_g, const LeafSpace& leaves) {
  const auto& gd = leaves.gd;
  const auto& params = leaves.params;
  const SmoothMap lambda = leaves.chart.lambda_g;
  const int nq = lambda.codomain().dim();
  const ChartManifold qbase = lambda.codomain();
  const double tol_rank = params.tol_rank;
  const Vec origin = Vec::Zero(gd.arrow_dim());

  PushforwardResult out;
  out.fiber = [d_g, lambda, origin, tol_rank](const Vec& q) {
    return pushforward_fiber_at(d_g, lambda, label_section(lambda, q, origin), tol_rank);
  };
  out.poisson = PoissonBivector{qbase, [fiber = out.fiber, tol_rank](const Vec& q) {
                                  const auto pi = poisson_from_fiber(fiber(q), tol_rank);
                                  if (!pi) {
                                    throw PreconditionError(
                                        "pushforward: characteristic space is not trivial");
                                  }
                                  return *pi;
                                }};
  out.dirac = from_poisson(out.poisson);

  CheckReport& rep = out.report;
  rep.name = "pushforward_dirac";
  rep.tolerance = params.tol_dirac;
  rep.samples = params.samples;
  Rng rng(params.seed + 24);
  const Mat j = pairing_matrix(nq);
  double lagrangian = 0.0;
  double jacobi = 0.0;
  double angle = 0.0;
  int g0_rank = 0;
  Json matrices = Json::array();
  try {
    for (int k = 0; k < params.samples; ++k) {
      const Vec g = gd.sampler.arrow(rng);
      const Vec q = lambda(g);
      const Mat f = pushforward_fiber_at(d_g, lambda, g, tol_rank);
      auto wit = [&] { return Json{{"g", to_json(g)}, {"label", to_json(q)}}; };
      if (f.cols() != nq) {
        rep.fail({{"check", "fiber dimension"}, {"g", to_json(g)}, {"rank", f.cols()}});
        continue;
      }
      const double iso = (f.transpose() * j * f).cwiseAbs().maxCoeff();
      lagrangian = std::max(lagrangian, iso);
      rep.record(iso, wit);
      const int r0 = static_cast<int>(image_of_kernel(f.topRows(nq), f.bottomRows(nq), tol_rank).cols());
      g0_rank = std::max(g0_rank, r0);
      const auto pi = poisson_from_fiber(f, tol_rank);
      if (r0 != 0 || !pi) {
        rep.fail({{"check", "trivial characteristic space"}, {"g", to_json(g)}, {"g0_rank", r0}});
        continue;
      }
      rep.record((*pi + pi->transpose()).cwiseAbs().maxCoeff(), wit);
      if (matrices.size() < 3) matrices.push_back({{"label", to_json(q)}, {"pi", to_json(*pi)}});

      const Vec moved = random_leaf_move(leaves, g, rng);
      const double a = max_principal_angle(f, pushforward_fiber_at(d_g, lambda, moved, tol_rank));
      angle = std::max(angle, a);
      rep.record(a, wit);

      const double jr = jacobi_residual(out.poisson, q, params.h_fd);
      jacobi = std::max(jacobi, jr);
      if (!(jr <= params.tol_jacobi)) {
        rep.fail({{"check", "Jacobi identity"}, {"label", to_json(q)}, {"residual", jr}});
      }
    }
    const auto fwd = is_forward_dirac(lambda, d_g, out.dirac, params, gd.sampler.arrow);
    rep.details["forward_dirac"] = {{"pass", fwd.pass}, {"max_residual", fwd.max_residual}};
    if (!fwd.pass) rep.fail({{"check", "forward Dirac"}, {"report", fwd.to_json()}});
  } catch (const Error& e) {
    rep.fail({{"error", e.what()}});
  }
  rep.details["lagrangian_max_residual"] = lagrangian;
  rep.details["g0_rank"] = g0_rank;
  rep.details["representative_max_angle"] = angle;
  rep.details["poisson_matrix_at_samples"] = matrices;
  rep.details["jacobi_residual"] = jacobi;
  return out;
}

}  // namespace folioid
