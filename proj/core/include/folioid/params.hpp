#pragma once

#include <cstdint>

namespace folioid {

/// Numerical knobs shared by all checks. Every field is overridable from a
/// scenario config.
struct NumericParams {
  double h_fd = 1e-5;
  int rk4_steps_per_unit = 200;
  double tol_rank = 1e-8;
  double tol_member = 1e-6;
  double tol_leaf = 1e-6;
  double tol_axiom = 1e-9;
  double tol_dirac = 1e-6;
  double tol_jac = 1e-4;
  double tol_angle = 1e-5;
  double tol_lift = 1e-6;
  double tol_desc = 1e-6;
  double tol_comp = 1e-8;
  double tol_target = 1e-8;
  double tol_jacobi = 1e-6;
  double t_max = 10.0;
  /// Infinite box bounds are clipped to this radius when sampling.
  double sample_radius = 2.0;
  int samples = 200;
  std::uint64_t seed = 1;
};

}  // namespace folioid
