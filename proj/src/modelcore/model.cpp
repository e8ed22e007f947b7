#include "cbf/model.hpp"

#include <cmath>
#include <string>

#include "cbf/error.hpp"

namespace cbf {

namespace {

void require_shape(const SufficientStats& s) {
    if (s.J < 1 || s.L < 0 || s.P < 1 || int(s.groups.size()) != s.J) {
        fail(Errc::DimensionMismatch, "sufficient statistics have an invalid shape");
    }
}

} // namespace

double SufficientStats::N() const {
    double n = 0.0;
    for (const auto& g : groups) n += g.n;
    return n;
}

Matrix SufficientStats::xtx() const {
    Matrix out = Matrix::Zero(K(), K());
    for (const auto& g : groups) out += g.xtx;
    return out;
}

Matrix SufficientStats::xty() const {
    Matrix out = Matrix::Zero(K(), P);
    for (const auto& g : groups) out += g.xty;
    return out;
}

Matrix SufficientStats::yty() const {
    Matrix out = Matrix::Zero(P, P);
    for (const auto& g : groups) out += g.yty;
    return out;
}

SufficientStats SufficientStats::zeros(int J, int L, int P) {
    SufficientStats s;
    s.J = J;
    s.L = L;
    s.P = P;
    const int K = J + L;
    s.groups.assign(std::size_t(J), GroupStats{0.0, Matrix::Zero(K, K), Matrix::Zero(K, P), Matrix::Zero(P, P)});
    return s;
}

SufficientStats& SufficientStats::operator+=(const SufficientStats& other) {
    if (J != other.J || L != other.L || P != other.P) {
        fail(Errc::SchemaMismatch, "cannot add sufficient statistics of different shapes");
    }
    for (std::size_t j = 0; j < groups.size(); ++j) {
        groups[j].n += other.groups[j].n;
        groups[j].xtx += other.groups[j].xtx;
        groups[j].xty += other.groups[j].xty;
        groups[j].yty += other.groups[j].yty;
    }
    return *this;
}

void validate(const DataBatch& batch) {
    const auto n = batch.y.rows();
    if (batch.groups < 1) fail(Errc::InvalidBatch, "batch must declare at least one group");
    if (batch.y.cols() < 1) fail(Errc::InvalidBatch, "batch needs at least one outcome column");
    if (batch.w.cols() > 0 && batch.w.rows() != n) fail(Errc::InvalidBatch, "covariate and outcome row counts differ");
    if (Eigen::Index(batch.group.size()) != n) fail(Errc::InvalidBatch, "group vector length differs from row count");
    for (int g : batch.group) {
        if (g < 0 || g >= batch.groups) {
            fail(Errc::InvalidBatch, "group label " + std::to_string(g + 1) + " outside 1.." + std::to_string(batch.groups));
        }
    }
    if (!batch.y.allFinite() || (batch.w.size() > 0 && !batch.w.allFinite())) {
        fail(Errc::InvalidBatch, "batch contains non-finite values");
    }
}

std::pair<Matrix, Matrix> build_design(const DataBatch& batch) {
    validate(batch);
    const auto n = batch.y.rows();
    const int J = batch.groups;
    const auto L = batch.w.cols();
    Matrix x = Matrix::Zero(n, J + L);
    std::vector<int> counts(std::size_t(J), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int g = batch.group[std::size_t(i)];
        x(i, g) = 1.0;
        ++counts[std::size_t(g)];
        if (L > 0) x.row(i).tail(L) = batch.w.row(i);
    }
    for (int j = 0; j < J; ++j) {
        if (counts[std::size_t(j)] == 0) fail(Errc::EmptyGroup, "group " + std::to_string(j + 1) + " has no observations");
    }
    return {x, batch.y};
}

SufficientStats sufficient_stats(const DataBatch& batch) {
    validate(batch);
    const int J = batch.groups;
    const int L = int(batch.w.cols());
    const int P = int(batch.y.cols());
    const int K = J + L;
    SufficientStats s = SufficientStats::zeros(J, L, P);
    Vector x(K);
    for (Eigen::Index i = 0; i < batch.y.rows(); ++i) {
        const int g = batch.group[std::size_t(i)];
        x.setZero();
        x[g] = 1.0;
        if (L > 0) x.tail(L) = batch.w.row(i).transpose();
        const Vector y = batch.y.row(i).transpose();
        auto& gs = s.groups[std::size_t(g)];
        gs.n += 1.0;
        gs.xtx.noalias() += x * x.transpose();
        gs.xty.noalias() += x * y.transpose();
        gs.yty.noalias() += y * y.transpose();
    }
    return s;
}

LsEstimates ls_estimates(const SufficientStats& stats) {
    require_shape(stats);
    const Matrix xtx = stats.xtx();
    Matrix l;
    if (!try_cholesky(xtx, l)) fail(Errc::SingularDesign, "X'X is singular (collinear covariates or empty group)");
    const double dof = stats.N() - stats.K() - stats.P + 1;
    if (dof < 1.0) {
        fail(Errc::InsufficientData, "need N - K - P + 1 >= 1, have N = " + std::to_string(int(stats.N())));
    }
    LsEstimates est;
    const Matrix xty = stats.xty();
    est.theta = l.transpose().triangularView<Eigen::Upper>().solve(l.triangularView<Eigen::Lower>().solve(xty));
    est.s = symmetrize(stats.yty() - xty.transpose() * est.theta);
    Matrix ls;
    if (!try_cholesky(est.s, ls)) {
        fail(Errc::InsufficientData, "residual scatter matrix S is not positive definite");
    }
    return est;
}

FractionVector minimal_fractions(const SufficientStats& stats) {
    require_shape(stats);
    FractionVector f;
    f.m = double(stats.P + stats.K()) / double(stats.J);
    f.b.resize(std::size_t(stats.J));
    for (int j = 0; j < stats.J; ++j) {
        const double n = stats.groups[std::size_t(j)].n;
        if (n <= 0.0) fail(Errc::EmptyGroup, "group " + std::to_string(j + 1) + " has no observations");
        const double b = f.m / n;
        if (b > 1.0) {
            fail(Errc::FractionExceedsOne, "group " + std::to_string(j + 1) + " has " + std::to_string(int(n)) +
                                               " observations, fewer than the minimal fraction needs (" +
                                               std::to_string(f.m) + ")");
        }
        f.b[std::size_t(j)] = b;
    }
    return f;
}

FractionalStats fractional_stats(const SufficientStats& stats, const FractionVector& b) {
    require_shape(stats);
    if (int(b.b.size()) != stats.J) fail(Errc::DimensionMismatch, "fraction vector length differs from J");
    const int K = stats.K();
    FractionalStats fs{Matrix::Zero(K, K), Matrix::Zero(K, stats.P), Matrix::Zero(stats.P, stats.P)};
    Matrix yty = Matrix::Zero(stats.P, stats.P);
    for (int j = 0; j < stats.J; ++j) {
        const auto& g = stats.groups[std::size_t(j)];
        const double bj = b.b[std::size_t(j)];
        fs.xtx += bj * g.xtx;
        fs.xty += bj * g.xty;
        yty += bj * g.yty;
    }
    fs.xtx = symmetrize(fs.xtx);
    Matrix l;
    if (!try_cholesky(fs.xtx, l)) fail(Errc::SingularFractionalDesign, "fractional design X_b'X_b is singular");
    const Matrix coef = l.transpose().triangularView<Eigen::Upper>().solve(l.triangularView<Eigen::Lower>().solve(fs.xty));
    fs.s = symmetrize(yty - fs.xty.transpose() * coef);
    Matrix ls;
    if (!try_cholesky(fs.s, ls)) {
        fail(Errc::SingularFractionalScatter, "fractional scatter S_b (" + std::to_string(stats.P) + " x " +
                                                  std::to_string(stats.P) + ") is not positive definite");
    }
    return fs;
}

MatrixTParams posterior_params(const SufficientStats& stats) {
    const LsEstimates est = ls_estimates(stats);
    return {est.theta, spd_inverse(stats.xtx(), "X'X"), est.s, stats.N() - stats.K() - stats.P + 1};
}

MatrixTParams prior_params(const SufficientStats& stats, const FractionVector& b, const Matrix& theta0) {
    const FractionalStats fs = fractional_stats(stats, b);
    if (theta0.rows() != stats.K() || theta0.cols() != stats.P) {
        fail(Errc::DimensionMismatch, "prior location must be K x P");
    }
    double total = 0.0;
    for (int j = 0; j < stats.J; ++j) total += stats.groups[std::size_t(j)].n * b.b[std::size_t(j)];
    // n_j * m / n_j loses the last bit; keep the integer dof exact
    if (std::abs(total - std::round(total)) < 1e-9) total = std::round(total);
    return {theta0, spd_inverse(fs.xtx, "X_b'X_b"), fs.s, total - stats.K() - stats.P + 1};
}

MvnParams conditional_normal(const Vector& mean, const Matrix& cov, const std::vector<int>& fixed_idx,
                             const Vector& fixed_vals) {
    const auto d = mean.size();
    if (cov.rows() != d || cov.cols() != d || Eigen::Index(fixed_idx.size()) != fixed_vals.size()) {
        fail(Errc::DimensionMismatch, "conditional_normal: inconsistent dimensions");
    }
    std::vector<char> fixed(std::size_t(d), 0);
    for (int i : fixed_idx) {
        if (i < 0 || i >= d || fixed[std::size_t(i)]) fail(Errc::DimensionMismatch, "conditional_normal: bad index");
        fixed[std::size_t(i)] = 1;
    }
    std::vector<int> free_idx;
    for (int i = 0; i < int(d); ++i) {
        if (!fixed[std::size_t(i)]) free_idx.push_back(i);
    }
    const auto e = Eigen::Index(fixed_idx.size());
    const auto o = Eigen::Index(free_idx.size());
    Matrix see(e, e), soe(o, e), soo(o, o);
    Vector me(e), mo(o);
    for (Eigen::Index i = 0; i < e; ++i) {
        me[i] = mean[fixed_idx[std::size_t(i)]];
        for (Eigen::Index j = 0; j < e; ++j) see(i, j) = cov(fixed_idx[std::size_t(i)], fixed_idx[std::size_t(j)]);
    }
    for (Eigen::Index i = 0; i < o; ++i) {
        mo[i] = mean[free_idx[std::size_t(i)]];
        for (Eigen::Index j = 0; j < e; ++j) soe(i, j) = cov(free_idx[std::size_t(i)], fixed_idx[std::size_t(j)]);
        for (Eigen::Index j = 0; j < o; ++j) soo(i, j) = cov(free_idx[std::size_t(i)], free_idx[std::size_t(j)]);
    }
    if (e == 0) return {mo, soo};
    Matrix l;
    if (!try_cholesky(see, l)) fail(Errc::SingularConditioningBlock, "conditioning block is not positive definite");
    const Matrix gain = l.transpose().triangularView<Eigen::Upper>()
                            .solve(l.triangularView<Eigen::Lower>().solve(soe.transpose()))
                            .transpose();
    return {mo + gain * (fixed_vals - me), symmetrize(soo - gain * soe.transpose())};
}

} // namespace cbf
