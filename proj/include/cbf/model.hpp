#pragma once

#include <vector>

#include "cbf/distributions.hpp"
#include "cbf/linalg.hpp"

namespace cbf {

/// Raw observations. Groups are 0-based here (the CLI maps labels onto 0..J-1).
struct DataBatch {
    Matrix y;                 // N x P outcomes
    Matrix w;                 // N x L covariates (L may be 0)
    std::vector<int> group;   // length N, values in [0, groups)
    int groups = 0;           // J

    Eigen::Index rows() const { return y.rows(); }
};

struct GroupStats {
    double n = 0.0;
    Matrix xtx;  // K x K
    Matrix xty;  // K x P
    Matrix yty;  // P x P
};

/// Per-group cross products; the only representation of data kept after
/// ingestion. Column order of X is the J group dummies, then the L covariates.
struct SufficientStats {
    int J = 0;
    int L = 0;
    int P = 0;
    std::vector<GroupStats> groups;

    int K() const { return J + L; }
    double N() const;
    Matrix xtx() const;
    Matrix xty() const;
    Matrix yty() const;

    /// All-zero statistics for the given shape.
    static SufficientStats zeros(int J, int L, int P);

    /// Entrywise sum; shapes must agree.
    SufficientStats& operator+=(const SufficientStats& other);
};

struct FractionVector {
    double m = 0.0;
    std::vector<double> b;  // per group
};

struct FractionalStats {
    Matrix xtx;  // X_b'X_b
    Matrix xty;  // X_b'Y_b
    Matrix s;    // S_b
};

struct LsEstimates {
    Matrix theta;  // K x P
    Matrix s;      // P x P residual cross products
};

/// Matrix-variate t: vec(Theta) has row scale `row_scale` (K x K), column
/// scale `col_scale` (P x P) and `dof` degrees of freedom (1 = matrix Cauchy).
/// Equivalently Theta | Sigma ~ N(location, Sigma (x) row_scale) with
/// Sigma ~ IW(iw_dof(), col_scale).
struct MatrixTParams {
    Matrix location;
    Matrix row_scale;
    Matrix col_scale;
    double dof = 1.0;

    double iw_dof() const { return dof + double(col_scale.rows()) - 1.0; }
};

/// X = [D | W] and Y. Throws EmptyGroup when a group has no rows.
std::pair<Matrix, Matrix> build_design(const DataBatch& batch);

void validate(const DataBatch& batch);

/// Group-wise cross products. Groups without rows contribute zero blocks, so
/// partial batches can be merged into existing statistics.
SufficientStats sufficient_stats(const DataBatch& batch);

LsEstimates ls_estimates(const SufficientStats& stats);

FractionVector minimal_fractions(const SufficientStats& stats);

FractionalStats fractional_stats(const SufficientStats& stats, const FractionVector& b);

MatrixTParams posterior_params(const SufficientStats& stats);

MatrixTParams prior_params(const SufficientStats& stats, const FractionVector& b, const Matrix& theta0);

/// Gaussian conditional of the free coordinates given x[fixed_idx] = fixed_vals.
/// The result is ordered like the remaining (not fixed) indices.
MvnParams conditional_normal(const Vector& mean, const Matrix& cov, const std::vector<int>& fixed_idx,
                             const Vector& fixed_vals);

} // namespace cbf
