#include "folioid/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SVD>

namespace folioid::linalg {

namespace {

int rank_from_singular_values(const Vec& sv, double tol_ratio) {
  if (sv.size() == 0) return 0;
  const double smax = sv[0];
  if (smax <= kAbsoluteFloor) return 0;
  const double cut = std::max(tol_ratio * smax, kAbsoluteFloor);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut) ++r;
  }
  return r;
}

}  // namespace

int numerical_rank(const Mat& m, double tol_ratio) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  return rank_from_singular_values(svd.singularValues(), tol_ratio);
}

Mat range_basis(const Mat& m, double tol_ratio) {
  if (m.rows() == 0) return Mat(0, 0);
  if (m.cols() == 0) return Mat(m.rows(), 0);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const int r = rank_from_singular_values(svd.singularValues(), tol_ratio);
  return svd.matrixU().leftCols(r);
}

Mat null_space(const Mat& m, double tol_ratio) {
  const Eigen::Index n = m.cols();
  if (n == 0) return Mat(0, 0);
  if (m.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues(), tol_ratio);
  return svd.matrixV().rightCols(n - r);
}

Mat projector(const Mat& q) { return q * q.transpose(); }

Mat intersect(const Mat& a, const Mat& b, double tol_ratio) {
  const Eigen::Index n = a.rows();
  const Mat id = Mat::Identity(n, n);
  Mat stacked(2 * n, n);
  stacked.topRows(n) = id - projector(a);
  stacked.bottomRows(n) = id - projector(b);
  return null_space(stacked, tol_ratio);
}

double distance_to_span(const Mat& q, const Vec& v) {
  if (q.cols() == 0) return v.norm();
  return (v - q * (q.transpose() * v)).norm();
}

double relative_distance_to_span(const Mat& q, const Vec& v) {
  return distance_to_span(q, v) / std::max(1.0, v.norm());
}

double max_principal_angle(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) return std::numbers::pi / 2;
  if (a.cols() == 0) return 0.0;
  // sin of the largest angle is the spectral norm of (I - P_a) b.
  const Mat residual = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Mat> svd(residual);
  const double s = std::min(1.0, svd.singularValues()[0]);
  return std::asin(s);
}

Vec min_norm_solve(const Mat& a, const Vec& b, double tol_ratio) {
  if (a.cols() == 0) return Vec(0);
  if (a.rows() == 0) return Vec::Zero(a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const int r = rank_from_singular_values(sv, tol_ratio);
  Vec coeffs = svd.matrixU().leftCols(r).transpose() * b;
  for (int i = 0; i < r; ++i) coeffs[i] /= sv[i];
  return svd.matrixV().leftCols(r) * coeffs;
}

Mat hstack(const Mat& a, const Mat& b) {
  Mat out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

Mat vstack(const Mat& a, const Mat& b) {
  Mat out(a.rows() + b.rows(), a.cols());
  out.topRows(a.rows()) = a;
  out.bottomRows(b.rows()) = b;
  return out;
}

Vec concat(const Vec& a, const Vec& b) {
  Vec out(a.size() + b.size());
  out.head(a.size()) = a;
  out.tail(b.size()) = b;
  return out;
}

}  // namespace folioid::linalg
