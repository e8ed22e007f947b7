#pragma once

#include <Eigen/Dense>

namespace cbf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Pivot tolerance: a Cholesky pivot below this fraction of the largest
/// diagonal entry is treated as "not positive definite".
inline constexpr double kPivotTolerance = 1e-12;

/// Relative asymmetry accepted for matrices that should be symmetric.
inline constexpr double kSymmetryTolerance = 1e-12;

bool is_symmetric(const Matrix& a, double rel_tol = kSymmetryTolerance);

/// Lower-triangular L with L * L^T = a. Throws Errc::NotPositiveDefinite when a
/// pivot drops below kPivotTolerance * max(diag(a)); `what` names the matrix in
/// the error message.
Matrix cholesky(const Matrix& a, const char* what = "matrix");

/// Same as cholesky() but reports failure through the return value.
bool try_cholesky(const Matrix& a, Matrix& lower);

/// Inverse of a symmetric positive definite matrix, symmetrized.
Matrix spd_inverse(const Matrix& a, const char* what = "matrix");

/// log|a| from its Cholesky factor.
double log_det_from_cholesky(const Matrix& lower);

inline Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

/// Numerical row rank using a rank-revealing QR with a relative threshold.
Eigen::Index row_rank(const Matrix& a, double rel_tol = 1e-10);

} // namespace cbf
