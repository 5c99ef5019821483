#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "folioid/leafspace.hpp"
#include "folioid/liegroupoid.hpp"
#include "folioid/multdist.hpp"

namespace folioid {

/// Pontryagin pairing (v, a) . (w, b) = a(w) + b(v).
double pontryagin_pairing(const Vec& v, const Vec& a, const Vec& w, const Vec& b);

/// Dirac structure given by n generator pairs on an n-dimensional chart.
struct DiracStructure {
  ChartManifold base;
  std::vector<std::pair<VectorField, OneForm>> gens;

  int dim() const { return base.dim(); }
  /// Generators at x as columns of a 2n x k matrix, tangent part on top.
  Mat generator_matrix(const Vec& x) const;
};

/// Orthonormal basis of D(x) inside R^n + R^n.
Mat dirac_fiber(const DiracStructure& d, const Vec& x, double tol_rank = 1e-10);

/// Antisymmetric matrix field; pi(a, b) = a^T Pi b and pi#(a) = Pi^T a.
struct PoissonBivector {
  ChartManifold base;
  std::function<Mat(const Vec&)> matrix;
};

PoissonBivector constant_poisson(const ChartManifold& base, const Mat& pi);

/// Max over (i, j, k) of |sum_l Pi^il d_l Pi^jk + cyclic| with central
/// differences of step h.
double jacobi_residual(const PoissonBivector& pi, const Vec& x, double h = 1e-5);

/// Graph of v -> i_v omega with omega(v, w) = v^T Omega w.
DiracStructure from_two_form(const ChartManifold& base, std::function<Mat(const Vec&)> omega);
/// Graph of a -> pi#(a).
DiracStructure from_poisson(const PoissonBivector& pi);
/// T M + 0.
DiracStructure tangent_dirac(const ChartManifold& base);

/// D (-) D on M x M: ((v_m, -v_n), (a_m, a_n)).
DiracStructure minus_double(const DiracStructure& d);

/// Pairings between generators and the fiber rank at sampled points.
CheckReport check_lagrangian(const DiracStructure& d, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample);

struct CharacteristicSpaces {
  Mat g0;  // v with (v, 0) in D
  Mat g1;  // tangent projection of D
  Mat p0;  // a with (0, a) in D
  Mat p1;  // cotangent projection of D
};

CharacteristicSpaces characteristic_spaces(const DiracStructure& d, const Vec& x,
                                           double tol_rank = 1e-10);

/// G0 as a distribution with rank declared from x0. Generators are the
/// orthogonal projections of the coordinate fields onto G0.
Distribution characteristic_distribution(const DiracStructure& d, const Vec& x0,
                                         double tol_rank = 1e-10);

struct PontryaginVector {
  Vec v;
  Vec a;
};

/// ([X, Y], L_X b - i_Y da) at x.
PontryaginVector courant_bracket(const std::pair<VectorField, OneForm>& e1,
                                 const std::pair<VectorField, OneForm>& e2, const Vec& x,
                                 double h = 1e-5);

/// Brackets of generator pairs stay in D at sampled points.
CheckReport check_integrable(const DiracStructure& d, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample);

/// For sampled m and every element (v_n, a_n) of D_N at n = F(m), the least
/// squares residual of finding (v_m, a_m) in D_M with TF v_m = v_n and
/// a_m = TF^* a_n.
CheckReport is_forward_dirac(const SmoothMap& f, const DiracStructure& d_m,
                             const DiracStructure& d_n, const NumericParams& params,
                             const std::function<Vec(Rng&)>& sample_m);

/// D_G as a subgroupoid of TG + T*G: base compatibility of source and target,
/// closure under products, and multiplicativity of G0.
CheckReport check_multiplicative_dirac(const SmoothGroupoid& gd, const DiracStructure& d_g,
                                       const NumericParams& params);

/// Unit covector over p extending a (components in the algebroid basis) by
/// zero on T eps(T_p P).
Vec unit_covector(const SmoothGroupoid& gd, const Vec& p, const Vec& a, const Mat& basis);

/// A point x with lambda(x) = q, by Gauss-Newton from x0.
Vec label_section(const SmoothMap& lambda, const Vec& q, const Vec& x0, double tol = 1e-12);

struct PushforwardResult {
  CheckReport report;
  /// Fiber of pr(D_G) at a label, computed from a representative.
  std::function<Mat(const Vec&)> fiber;
  PoissonBivector poisson;
  DiracStructure dirac;
};

/// Push D_G forward along lambda_g. Samples representatives with the
/// groupoid sampler, checks the Lagrangian property, trivial characteristic
/// space, antisymmetry of the extracted bivector, representative independence,
/// the Jacobi identity and the forward Dirac property of lambda_g.
/// The leaf space should be the one of G0, so that resampled representatives
/// move inside the fibers of lambda_g.
PushforwardResult pushforward_dirac(const DiracStructure& d_g, const LeafSpace& leaves);

/// Pi with graph {(Pi^T a, a)} equal to span(fiber), or nullopt when the
/// covector part of the fiber is singular.
std::optional<Mat> poisson_from_fiber(const Mat& fiber, double tol_rank = 1e-10);

}  // namespace folioid
