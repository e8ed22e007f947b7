#include <algorithm>
#include <cmath>
#include <limits>

#include "cbf/constraints.hpp"
#include "cbf/error.hpp"

namespace cbf {

namespace {

/// Pivot columns of the reduced row echelon form.
std::vector<int> pivot_columns(const Matrix& a) {
    Matrix m = a;
    if (m.size() == 0) return {};
    const double tol = 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff());
    std::vector<int> pivots;
    Eigen::Index row = 0;
    for (Eigen::Index col = 0; col < m.cols() && row < m.rows(); ++col) {
        Eigen::Index best;
        const double mag = m.col(col).segment(row, m.rows() - row).cwiseAbs().maxCoeff(&best);
        if (mag <= tol) continue;
        best += row;
        m.row(row).swap(m.row(best));
        m.row(row) /= m(row, col);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (r != row) m.row(r) -= m(r, col) * m.row(row);
        }
        pivots.push_back(int(col));
        ++row;
    }
    return pivots;
}

/// max c'x subject to A x <= b, x >= 0, for b >= 0 (origin feasible).
/// Dense tableau with Bland's rule; the problems here are tiny.
double simplex_max(const Matrix& a, const Vector& b, const Vector& c) {
    const Eigen::Index m = a.rows(), n = a.cols();
    Matrix t = Matrix::Zero(m + 1, n + m + 1);
    t.topLeftCorner(m, n) = a;
    t.block(0, n, m, m).setIdentity();
    t.topRightCorner(m, 1) = b;
    t.bottomLeftCorner(1, n) = -c.transpose();
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) basis[std::size_t(i)] = n + i;
    constexpr double eps = 1e-12;
    for (int iter = 0; iter < 10000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (t(m, j) < -eps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) return t(m, n + m);
        Eigen::Index leave = -1;
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            if (t(i, enter) > eps) {
                const double ratio = t(i, n + m) / t(i, enter);
                if (ratio < best - eps || (std::abs(ratio - best) <= eps && basis[std::size_t(i)] < basis[std::size_t(leave)])) {
                    best = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return std::numeric_limits<double>::infinity();
        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i != leave && t(i, enter) != 0.0) t.row(i) -= t(i, enter) * t.row(leave);
        }
        basis[std::size_t(leave)] = enter;
    }
    fail(Errc::InconsistentConstraints, "feasibility check did not converge");
}

} // namespace

double order_slack(const Matrix& re, const Vector& rhs_e, const Matrix& ro, const Vector& rhs_o) {
    const Eigen::Index pk = ro.cols();
    Vector theta_p = Vector::Zero(pk);
    Matrix null_basis;
    if (re.rows() > 0) {
        theta_p = Eigen::CompleteOrthogonalDecomposition<Matrix>(re).solve(rhs_e);
        Eigen::FullPivLU<Matrix> lu(re);
        lu.setThreshold(1e-10);
        null_basis = lu.kernel();
        if (lu.rank() == pk) null_basis = Matrix(pk, 0);
    } else {
        null_basis = Matrix::Identity(pk, pk);
    }
    const Matrix a = ro * null_basis;
    const Vector g = ro * theta_p - rhs_o;
    if (a.cols() == 0) return std::min(1.0, g.minCoeff());
    const Eigen::Index r = a.rows(), n = a.cols();
    const double shift = std::max(0.0, -g.minCoeff()) + 1.0;
    // x = [z+, z-, tau], t = tau - shift
    Matrix lp = Matrix::Zero(r + 1, 2 * n + 1);
    lp.block(0, 0, r, n) = -a;
    lp.block(0, n, r, n) = a;
    lp.block(0, 2 * n, r, 1).setOnes();
    lp(r, 2 * n) = 1.0;
    Vector b(r + 1);
    b.head(r) = g.array() + shift;
    b[r] = 1.0 + shift;
    Vector c = Vector::Zero(2 * n + 1);
    c[2 * n] = 1.0;
    return simplex_max(lp, b, c) - shift;
}

Vector boundary_point(const ConstrainedModel& m, int pk) {
    const Eigen::Index rows = m.re.rows() + m.ro.rows();
    if (rows == 0) return Vector::Zero(pk);
    Matrix a(rows, pk);
    Vector r(rows);
    a << m.re, m.ro;
    r << m.rhs_e, m.rhs_o;
    Vector theta0 = Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(r);
    const double resid = (a * theta0 - r).cwiseAbs().maxCoeff();
    if (!(resid < 1e-10 * std::max(1.0, r.cwiseAbs().maxCoeff()))) {
        fail(Errc::InconsistentConstraints,
             "constraints of '" + (m.source.empty() ? m.name : m.source) +
                 "' cannot all hold with equality at one point, so the prior has no boundary location");
    }
    for (Eigen::Index i = 0; i < theta0.size(); ++i) {
        if (std::abs(theta0[i]) < 1e-15) theta0[i] = 0.0;
    }
    return theta0;
}

TransformedModel derive_transform(const ConstrainedModel& m, int pk) {
    if (m.re.cols() != pk || m.ro.cols() != pk) fail(Errc::DimensionMismatch, "constraint matrices do not match PK");
    TransformedModel t;
    const std::vector<int> pivots = pivot_columns(m.re);
    if (Eigen::Index(pivots.size()) != m.re.rows()) {
        fail(Errc::DegenerateTransform, "equality rows of '" + m.name + "' are linearly dependent");
    }
    std::vector<char> is_pivot(std::size_t(pk), 0);
    for (int p : pivots) is_pivot[std::size_t(p)] = 1;
    for (int j = 0; j < pk; ++j) {
        if (!is_pivot[std::size_t(j)]) t.free_coords.push_back(j);
    }
    const auto re = m.re.rows();
    const auto free = Eigen::Index(t.free_coords.size());
    t.d = Matrix::Zero(free, pk);
    for (Eigen::Index i = 0; i < free; ++i) t.d(i, t.free_coords[std::size_t(i)]) = 1.0;
    t.h.resize(pk, pk);
    t.h << m.re, t.d;
    Eigen::FullPivLU<Matrix> lu(t.h);
    if (!lu.isInvertible()) fail(Errc::DegenerateTransform, "transformation matrix H is singular");
    t.h_inv = lu.inverse();
    t.ro_tilde = m.ro * t.h_inv.rightCols(free);
    t.rhs_o_tilde = m.rhs_o - m.ro * t.h_inv.leftCols(re) * m.rhs_e;
    t.rtilde_full_rank = m.ro.rows() == 0 || row_rank(t.ro_tilde) == t.ro_tilde.rows();
    return t;
}

} // namespace cbf
