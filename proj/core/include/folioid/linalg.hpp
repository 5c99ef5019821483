#pragma once

#include <Eigen/Core>

namespace folioid {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace linalg {

/// Singular values at or below this absolute level count as zero even when
/// the matrix itself is tiny.
inline constexpr double kAbsoluteFloor = 1e-13;

/// Number of singular values above tol_ratio * sigma_max.
int numerical_rank(const Mat& m, double tol_ratio);

/// Orthonormal basis (columns) of the column span of m.
Mat range_basis(const Mat& m, double tol_ratio);

/// Orthonormal basis (columns) of ker m. A matrix with zero rows has the
/// whole space as kernel.
Mat null_space(const Mat& m, double tol_ratio);

/// Orthogonal projector onto span(q) for orthonormal q.
Mat projector(const Mat& q);

/// Orthonormal basis of span(a) intersected with span(b), computed as the
/// kernel of the stacked complement projectors [I - P_a; I - P_b].
Mat intersect(const Mat& a, const Mat& b, double tol_ratio);

/// |v - Q Q^T v| for orthonormal q.
double distance_to_span(const Mat& q, const Vec& v);

/// Distance to span, scaled by max(1, |v|).
double relative_distance_to_span(const Mat& q, const Vec& v);

/// Largest principal angle between the spans of orthonormal a and b.
/// Returns pi/2 when the dimensions differ.
double max_principal_angle(const Mat& a, const Mat& b);

/// Minimum-norm least-squares solution of a x = b, singular values below
/// tol_ratio * sigma_max treated as zero.
Vec min_norm_solve(const Mat& a, const Vec& b, double tol_ratio);

/// Stack two column blocks horizontally.
Mat hstack(const Mat& a, const Mat& b);

/// Stack two row blocks vertically.
Mat vstack(const Mat& a, const Mat& b);

Vec concat(const Vec& a, const Vec& b);

}  // namespace linalg
}  // namespace folioid
