#pragma once

#include <optional>
#include <string>
#include <vector>

#include "folioid/dirac.hpp"
#include "folioid/fingroupoid.hpp"
#include "folioid/leafspace.hpp"

namespace folioid {

/// A smooth groupoid with a multiplicative distribution, first integrals for
/// its leaves and (when known in closed form) the quotient groupoid on labels.
struct SmoothScenario {
  std::string family;
  LeafSpace leaves;
  std::optional<SmoothGroupoid> quotient;
  /// Fields declared complete on G and their descended fields on P.
  std::vector<VectorField> complete_fields;
  std::vector<VectorField> complete_base_fields;
};

/// Orthonormal basis of the orthogonal complement of span(cols) in R^n, each
/// column with its largest-magnitude entry positive, columns ordered by the
/// position of that entry.
Mat complement_basis(const std::vector<Vec>& cols, int n, double tol_rank = 1e-10);

/// Orthonormal basis of span(cols), normalized like complement_basis.
Mat span_basis(const std::vector<Vec>& cols, int n, double tol_rank = 1e-10);

/// Pair groupoid of R^m with S = D x D for the constant distribution
/// D = span(d_basis). Labels are complement coordinates of each factor.
SmoothScenario make_pair_scenario(int m, const std::vector<Vec>& d_basis,
                                  const NumericParams& params);

/// R^k x R^m => R^m with S = W x F for constant W in R^k and F in R^m.
SmoothScenario make_vb_scenario(int k, const std::vector<Vec>& w_basis, int m,
                                const std::vector<Vec>& f_basis, const NumericParams& params);

/// Pair groupoid of R^m with R acting by simultaneous translation of both
/// factors along `direction`; S is the vertical space of the action.
SmoothScenario make_group_action_scenario(int m, const Vec& direction,
                                          const NumericParams& params);

/// Pair(R^d) x R => R^d with (a, b, c)(b, e, c') = (a, e, c + c').
SmoothGroupoid gauge_translation_groupoid(int d, double sample_radius = 2.0);

/// Pair groupoid of R^m carrying the minus double of the graph of a constant
/// presymplectic form Omega on R^m. The leaves are those of G0 = ker x ker;
/// labels are complement coordinates. With weight_coordinate = k the form is
/// x_k Omega instead, which is not closed for a nonzero Omega of constant
/// kernel direction e_k (leaves are still those of the constant form).
struct DiracScenario {
  SmoothScenario smooth;
  Mat omega;
  DiracStructure d_m;
  DiracStructure d_g;
};

DiracScenario make_presymplectic_scenario(const Mat& omega, const NumericParams& params,
                                          int weight_coordinate = -1);

/// Finite instances: the pair groupoid on four objects with block N and the
/// Z/4-bundle over two objects with N = 2Z/4.
struct FiniteScenario {
  std::string name;
  FiniteGroupoid groupoid;
  ArrowSet normal;
  std::optional<NormalSubgroupoidSystem> nss;
};

FiniteScenario make_finite_pair4();
/// `full_relation` relates the two objects of the Z/4-bundle.
FiniteScenario make_finite_z4_bundle(bool full_relation = true);

}  // namespace folioid
