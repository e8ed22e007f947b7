#include "cbf/linalg.hpp"

#include <cmath>
#include <string>

#include "cbf/error.hpp"

namespace cbf {

bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool try_cholesky(const Matrix& a, Matrix& lower) {
    const Eigen::Index n = a.rows();
    if (n != a.cols() || n == 0) return false;
    if (!a.allFinite()) return false;
    const double max_diag = a.diagonal().maxCoeff();
    if (!(max_diag > 0.0)) return false;
    const double floor = kPivotTolerance * max_diag;

    lower = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double pivot = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
        if (!(pivot > floor)) return false;
        const double ljj = std::sqrt(pivot);
        lower(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / ljj;
        }
    }
    return true;
}

Matrix cholesky(const Matrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        fail(Errc::DimensionMismatch, std::string(what) + " is not square");
    }
    if (!is_symmetric(a)) {
        fail(Errc::NotPositiveDefinite, std::string(what) + " is not symmetric");
    }
    Matrix lower;
    if (!try_cholesky(a, lower)) {
        fail(Errc::NotPositiveDefinite,
             std::string(what) + " (" + std::to_string(a.rows()) + "x" +
                 std::to_string(a.cols()) + ") is not positive definite");
    }
    return lower;
}

Matrix spd_inverse(const Matrix& a, const char* what) {
    const Matrix lower = cholesky(a, what);
    const Eigen::Index n = a.rows();
    Matrix linv = lower.triangularView<Eigen::Lower>().solve(Matrix::Identity(n, n));
    return symmetrize(linv.transpose() * linv);
}

double log_det_from_cholesky(const Matrix& lower) {
    return 2.0 * lower.diagonal().array().log().sum();
}

Eigen::Index row_rank(const Matrix& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) return 0;
    Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
    qr.setThreshold(rel_tol);
    return qr.rank();
}

} // namespace cbf
