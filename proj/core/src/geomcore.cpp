#include "folioid/geomcore.hpp"

#include <cmath>
#include <string>

#include "folioid/errors.hpp"
#include "folioid/rng.hpp"

namespace folioid {

namespace {

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

void require_dim(const Vec& x, int dim, const char* what) {
  if (x.size() != dim) {
    throw StructuralError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(x.size()));
  }
}

}  // namespace

ChartManifold::ChartManifold(std::vector<Interval> box, std::vector<std::optional<double>> periods)
    : box_(std::move(box)), periods_(std::move(periods)) {
  if (periods_.empty()) periods_.resize(box_.size());
  if (periods_.size() != box_.size()) {
    throw StructuralError("ChartManifold: periodic flags do not match box dimension");
  }
  for (std::size_t i = 0; i < box_.size(); ++i) {
    if (!(box_[i].lower < box_[i].upper)) {
      throw StructuralError("ChartManifold: interval " + std::to_string(i) +
                            " has lower >= upper");
    }
    if (periods_[i]) {
      if (!(*periods_[i] > 0) || !std::isfinite(box_[i].lower)) {
        throw StructuralError("ChartManifold: periodic coordinate " + std::to_string(i) +
                              " needs a finite lower bound and positive period");
      }
    }
  }
}

ChartManifold ChartManifold::euclidean(int dim) {
  return ChartManifold(std::vector<Interval>(static_cast<std::size_t>(dim)));
}

ChartManifold ChartManifold::product(const ChartManifold& a, const ChartManifold& b) {
  auto box = a.box_;
  box.insert(box.end(), b.box_.begin(), b.box_.end());
  auto periods = a.periods_;
  periods.insert(periods.end(), b.periods_.begin(), b.periods_.end());
  return ChartManifold(std::move(box), std::move(periods));
}

Vec ChartManifold::wrap(const Vec& x) const {
  Vec out = x;
  for (int i = 0; i < dim(); ++i) {
    if (const auto& period = periods_[i]) {
      const double lo = box_[i].lower;
      out[i] = lo + std::fmod(std::fmod(x[i] - lo, *period) + *period, *period);
    }
  }
  return out;
}

bool ChartManifold::contains(const Vec& x) const {
  if (x.size() != dim()) return false;
  const Vec w = wrap(x);
  for (int i = 0; i < dim(); ++i) {
    if (periods_[i]) continue;
    if (w[i] < box_[i].lower || w[i] > box_[i].upper) return false;
  }
  return true;
}

Vec ChartManifold::difference(const Vec& a, const Vec& b) const {
  Vec d = a - b;
  for (int i = 0; i < dim(); ++i) {
    if (const auto& period = periods_[i]) {
      d[i] -= *period * std::floor(d[i] / *period + 0.5);
    }
  }
  return d;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  Vec xp = x;
  Vec xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

SmoothMap::SmoothMap(ChartManifold domain, ChartManifold codomain, Eval eval, Jacobian jac,
                     double fd_step)
    : domain_(std::move(domain)),
      codomain_(std::move(codomain)),
      eval_(std::move(eval)),
      jac_(std::move(jac)),
      fd_step_(fd_step) {}

Vec SmoothMap::operator()(const Vec& x) const {
  require_dim(x, domain_.dim(), "SmoothMap argument");
  Vec y = eval_(x);
  require_dim(y, codomain_.dim(), "SmoothMap value");
  return y;
}

Mat SmoothMap::jacobian(const Vec& x) const {
  if (!jac_) return fd_jacobian(x);
  require_dim(x, domain_.dim(), "SmoothMap argument");
  Mat j = jac_(x);
  if (j.rows() != codomain_.dim() || j.cols() != domain_.dim()) {
    throw StructuralError("SmoothMap: analytic Jacobian has wrong shape");
  }
  return j;
}

Mat SmoothMap::fd_jacobian(const Vec& x) const {
  require_dim(x, domain_.dim(), "SmoothMap argument");
  return folioid::fd_jacobian(eval_, x, fd_step_);
}

SmoothMap SmoothMap::without_jacobian() const {
  return SmoothMap(domain_, codomain_, eval_, {}, fd_step_);
}

double jacobian_relative_error(const SmoothMap& f, const Vec& x) {
  if (!f.has_analytic_jacobian()) return 0.0;
  const Mat a = f.jacobian(x);
  return (a - f.fd_jacobian(x)).norm() / std::max(1.0, a.norm());
}

Vec sample_in_box(const ChartManifold& m, Rng& rng, double radius) {
  Vec x(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    const double lo = std::max(m.box()[i].lower, -radius);
    const double hi = std::min(m.box()[i].upper, radius);
    x[i] = lo < hi ? rng.uniform(lo, hi) : lo;
  }
  return x;
}

VectorField::VectorField(ChartManifold base, Eval eval)
    : base_(std::move(base)), eval_(std::move(eval)) {}

VectorField VectorField::constant(ChartManifold base, Vec value) {
  return VectorField(std::move(base), [value = std::move(value)](const Vec&) { return value; });
}

Vec VectorField::operator()(const Vec& x) const {
  require_dim(x, base_.dim(), "VectorField argument");
  Vec v = eval_(x);
  require_dim(v, base_.dim(), "VectorField value");
  return v;
}

Mat VectorField::jacobian(const Vec& x, double h) const {
  return fd_jacobian([this](const Vec& p) { return (*this)(p); }, x, h);
}

OneForm::OneForm(ChartManifold base, Eval eval) : base_(std::move(base)), eval_(std::move(eval)) {}

OneForm OneForm::constant(ChartManifold base, Vec value) {
  return OneForm(std::move(base), [value = std::move(value)](const Vec&) { return value; });
}

OneForm OneForm::zero(ChartManifold base) {
  const int n = base.dim();
  return constant(std::move(base), Vec::Zero(n));
}

Vec OneForm::operator()(const Vec& x) const {
  require_dim(x, base_.dim(), "OneForm argument");
  Vec a = eval_(x);
  require_dim(a, base_.dim(), "OneForm value");
  return a;
}

Mat OneForm::jacobian(const Vec& x, double h) const {
  return fd_jacobian([this](const Vec& p) { return (*this)(p); }, x, h);
}

Vec integrate(const ChartManifold& space, const std::function<Vec(double, const Vec&)>& rhs,
              const Vec& x0, double duration, int steps) {
  if (steps < 1) throw PreconditionError("integrate: steps must be positive");
  require_dim(x0, space.dim(), "flow start");
  if (duration == 0.0) return x0;
  const double dt = duration / steps;
  Vec x = x0;
  auto guard = [&](const Vec& candidate, const Vec& last, double time) {
    if (!candidate.allFinite()) {
      throw NumericalBlowup("flow: non-finite state at t=" + std::to_string(time));
    }
    if (!space.contains(candidate)) {
      throw FlowEscapedBox("flow: trajectory left the chart box at t=" + std::to_string(time),
                           to_std(last), time);
    }
  };
  for (int i = 0; i < steps; ++i) {
    const double tau = i * dt;
    const Vec k1 = rhs(tau, x);
    const Vec k2 = rhs(tau + 0.5 * dt, x + 0.5 * dt * k1);
    const Vec k3 = rhs(tau + 0.5 * dt, x + 0.5 * dt * k2);
    const Vec k4 = rhs(tau + dt, x + dt * k3);
    Vec next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    guard(next, x, tau + dt);
    x = space.wrap(next);
  }
  return x;
}

Vec flow(const VectorField& field, const Vec& x0, double t, int steps) {
  return integrate(field.base(), [&field](double, const Vec& x) { return field(x); }, x0, t,
                   steps);
}

Vec flow_for(const VectorField& field, const Vec& x0, double t, int steps_per_unit) {
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) * steps_per_unit)));
  return flow(field, x0, t, steps);
}

Vec pushforward(const SmoothMap& f, const Vec& x, const Vec& v) {
  require_dim(v, f.domain().dim(), "pushforward tangent");
  return f.jacobian(x) * v;
}

Vec lie_bracket(const VectorField& x_field, const VectorField& y_field, const Vec& x, double h) {
  Vec out = y_field.jacobian(x, h) * x_field(x) - x_field.jacobian(x, h) * y_field(x);
  if (!out.allFinite()) throw NumericalBlowup("lie_bracket: non-finite value");
  return out;
}

Vec lie_derivative_oneform(const VectorField& x_field, const OneForm& beta, const Vec& x,
                           double h) {
  // With constant coordinate fields e_i: X(beta_i) = (D beta X)_i and
  // [X, e_i] = -DX e_i, so the second term contributes (DX^T beta)_i.
  Vec out = beta.jacobian(x, h) * x_field(x) + x_field.jacobian(x, h).transpose() * beta(x);
  if (!out.allFinite()) throw NumericalBlowup("lie_derivative_oneform: non-finite value");
  return out;
}

double d_oneform(const OneForm& alpha, const Vec& x, const Vec& v, const Vec& w, double h) {
  // v(alpha(w^)) - w(alpha(v^)); the bracket of constant extensions vanishes.
  const Mat da = alpha.jacobian(x, h);
  const double out = w.dot(da * v) - v.dot(da * w);
  if (!std::isfinite(out)) throw NumericalBlowup("d_oneform: non-finite value");
  return out;
}

Vec interior_d_oneform(const OneForm& alpha, const Vec& y_value, const Vec& x, double h) {
  const Mat da = alpha.jacobian(x, h);
  Vec out = da * y_value - da.transpose() * y_value;
  if (!out.allFinite()) throw NumericalBlowup("interior_d_oneform: non-finite value");
  return out;
}

}  // namespace folioid
