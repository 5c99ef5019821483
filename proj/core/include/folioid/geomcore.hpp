#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "folioid/linalg.hpp"

namespace folioid {

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr int kDefaultStepsPerUnit = 200;

struct Interval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

/// A single global chart: a box in R^n, optionally periodic per coordinate.
/// A periodic coordinate is wrapped into [lower, lower + period).
class ChartManifold {
 public:
  ChartManifold() = default;
  explicit ChartManifold(std::vector<Interval> box,
                         std::vector<std::optional<double>> periods = {});

  static ChartManifold euclidean(int dim);
  static ChartManifold product(const ChartManifold& a, const ChartManifold& b);

  int dim() const { return static_cast<int>(box_.size()); }
  const std::vector<Interval>& box() const { return box_; }
  const std::vector<std::optional<double>>& periods() const { return periods_; }
  bool is_periodic(int i) const { return periods_[i].has_value(); }

  Vec wrap(const Vec& x) const;
  bool contains(const Vec& x) const;
  /// a - b with periodic coordinates reduced to [-period/2, period/2).
  Vec difference(const Vec& a, const Vec& b) const;
  double distance(const Vec& a, const Vec& b) const { return difference(a, b).norm(); }

 private:
  std::vector<Interval> box_;
  std::vector<std::optional<double>> periods_;
};

/// Central-difference Jacobian of f at x, one column per coordinate.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = kDefaultFdStep);

/// Smooth map between charts. Without an analytic Jacobian the central
/// finite-difference Jacobian is used.
class SmoothMap {
 public:
  using Eval = std::function<Vec(const Vec&)>;
  using Jacobian = std::function<Mat(const Vec&)>;

  SmoothMap() = default;
  SmoothMap(ChartManifold domain, ChartManifold codomain, Eval eval, Jacobian jac = {},
            double fd_step = kDefaultFdStep);

  const ChartManifold& domain() const { return domain_; }
  const ChartManifold& codomain() const { return codomain_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(jac_); }

  Vec operator()(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  Mat fd_jacobian(const Vec& x) const;

  /// Copy of this map with the analytic Jacobian dropped.
  SmoothMap without_jacobian() const;

 private:
  ChartManifold domain_;
  ChartManifold codomain_;
  Eval eval_;
  Jacobian jac_;
  double fd_step_ = kDefaultFdStep;
};

/// |J_analytic - J_fd| / max(1, |J_analytic|) at x (Frobenius norms). Zero
/// when the map has no analytic Jacobian.
double jacobian_relative_error(const SmoothMap& f, const Vec& x);

class Rng;

/// Uniform point of the chart box, with infinite bounds clipped to
/// [-radius, radius].
Vec sample_in_box(const ChartManifold& m, Rng& rng, double radius);

class VectorField {
 public:
  using Eval = std::function<Vec(const Vec&)>;

  VectorField() = default;
  VectorField(ChartManifold base, Eval eval);

  /// Constant field with the given components.
  static VectorField constant(ChartManifold base, Vec value);

  const ChartManifold& base() const { return base_; }
  Vec operator()(const Vec& x) const;
  /// D X at x: entry (i, j) is d X_i / d x_j.
  Mat jacobian(const Vec& x, double h = kDefaultFdStep) const;

 private:
  ChartManifold base_;
  Eval eval_;
};

class OneForm {
 public:
  using Eval = std::function<Vec(const Vec&)>;

  OneForm() = default;
  OneForm(ChartManifold base, Eval eval);

  static OneForm constant(ChartManifold base, Vec value);
  static OneForm zero(ChartManifold base);

  const ChartManifold& base() const { return base_; }
  Vec operator()(const Vec& x) const;
  Mat jacobian(const Vec& x, double h = kDefaultFdStep) const;

 private:
  ChartManifold base_;
  Eval eval_;
};

/// Endpoint of the flow of X from x0 for time t, classical RK4 with the
/// given number of steps. Throws FlowEscapedBox (with the last state inside
/// the box) or NumericalBlowup.
Vec flow(const VectorField& field, const Vec& x0, double t, int steps);

/// flow() with steps = max(1, ceil(|t| * steps_per_unit)).
Vec flow_for(const VectorField& field, const Vec& x0, double t,
             int steps_per_unit = kDefaultStepsPerUnit);

/// RK4 for a time-dependent field x' = f(tau, x) on [0, duration].
Vec integrate(const ChartManifold& space, const std::function<Vec(double, const Vec&)>& rhs,
              const Vec& x0, double duration, int steps);

/// T_x f (v).
Vec pushforward(const SmoothMap& f, const Vec& x, const Vec& v);

/// [X, Y](x) = DY X - DX Y.
Vec lie_bracket(const VectorField& x_field, const VectorField& y_field, const Vec& x,
                double h = kDefaultFdStep);

/// Components of (L_X beta) at x in the coordinate coframe:
/// (L_X beta)(e_i) = X(beta(e_i)) - beta([X, e_i]).
Vec lie_derivative_oneform(const VectorField& x_field, const OneForm& beta, const Vec& x,
                           double h = kDefaultFdStep);

/// d alpha (v, w) at x using constant extensions of v and w.
double d_oneform(const OneForm& alpha, const Vec& x, const Vec& v, const Vec& w,
                 double h = kDefaultFdStep);

/// Components of i_Y d alpha at x, i.e. the covector w -> d alpha(Y(x), w).
Vec interior_d_oneform(const OneForm& alpha, const Vec& y_value, const Vec& x,
                       double h = kDefaultFdStep);

}  // namespace folioid
