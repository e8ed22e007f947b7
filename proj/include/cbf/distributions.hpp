#pragma once

#include "cbf/linalg.hpp"
#include "cbf/rng.hpp"

namespace cbf {

struct MvnParams {
    Vector mean;
    Matrix cov;
};

/// Multivariate Student t; dof == 1 is the multivariate Cauchy.
struct MvtParams {
    Vector location;
    Matrix scale;
    double dof = 1.0;
};

// Univariate helpers.
double normal_cdf(double x);
/// Standard normal quantile (Wichura's AS241, ~1e-16 relative).
double normal_quantile(double p);
/// Lower-tail CDF of a standard Student t with real dof.
double student_t_cdf(double x, double dof);

double mvn_logpdf(const Vector& x, const MvnParams& p);
double mvt_logpdf(const Vector& x, const MvtParams& p);

/// Gaussian log-density when the covariance is already factored (L L^T = cov).
double mvn_logpdf_cholesky(const Vector& x, const Vector& mean, const Matrix& lower);

/// Inverse-Wishart IW(dof, scale) with density proportional to
/// |S|^{-(dof+d+1)/2} exp(-tr(scale S^{-1})/2), so that
/// E[S] = scale / (dof - d - 1) for dof > d + 1.
///
/// Draws use the Bartlett decomposition of the matching Wishart: with
/// scale = U U^T and A the Bartlett factor, S = (U A^{-T})(U A^{-T})^T.
class InverseWishart {
public:
    InverseWishart(double dof, const Matrix& scale);

    Matrix sample(Rng& rng) const;

    double dof() const { return dof_; }
    Eigen::Index dim() const { return scale_chol_.rows(); }

private:
    double dof_;
    Matrix scale_chol_;
};

/// Convenience wrapper: one IW(dof, scale) draw.
Matrix sample_inv_wishart(double dof, const Matrix& scale, Rng& rng);

} // namespace cbf
