#include "cbf/distributions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "cbf/error.hpp"

namespace cbf {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void check_dims(const Vector& x, Eigen::Index mean_dim, const Matrix& m) {
    if (x.size() != mean_dim || m.rows() != mean_dim || m.cols() != mean_dim) {
        fail(Errc::DimensionMismatch,
             "dimension mismatch: x has " + std::to_string(x.size()) + " entries, location " +
                 std::to_string(mean_dim) + ", matrix " + std::to_string(m.rows()) + "x" +
                 std::to_string(m.cols()));
    }
}

double poly(const double* c, int n, double x) {
    double r = c[n - 1];
    for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
    return r;
}

} // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 * 0.5); }

double normal_quantile(double p) {
    static constexpr double a[8] = {3.3871328727963666080e0, 1.3314166789178437745e+2,
                                    1.9715909503065514427e+3, 1.3731693765509461125e+4,
                                    4.5921953931549871457e+4, 6.7265770927008700853e+4,
                                    3.3430575583588128105e+4, 2.5090809287301226727e+3};
    static constexpr double b[8] = {1.0,
                                    4.2313330701600911252e+1, 6.8718700749205790830e+2,
                                    5.3941960214247511077e+3, 2.1213794301586595867e+4,
                                    3.9307895800092710610e+4, 2.8729085735721942674e+4,
                                    5.2264952788528545610e+3};
    static constexpr double c[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                    5.76949722146069140550e0, 3.64784832476320460504e0,
                                    1.27045825245236838258e0, 2.41780725177450611770e-1,
                                    2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double d[8] = {1.0,
                                    2.05319162663775882187e0, 1.67638483018380384940e0,
                                    6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                    1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                    1.05075007164441684324e-9};
    static constexpr double e[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                    1.78482653991729133580e0, 2.96560571828504891230e-1,
                                    2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                    2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double f[8] = {1.0,
                                    5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                    1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                    1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                    2.04426310338993978564e-15};
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(a, 8, r) / poly(b, 8, r);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = poly(c, 8, r) / poly(d, 8, r);
    } else {
        r -= 5.0;
        x = poly(e, 8, r) / poly(f, 8, r);
    }
    return q < 0.0 ? -x : x;
}

double student_t_cdf(double x, double dof) {
    if (!(dof > 0.0)) fail(Errc::InvalidDof, "Student t requires dof > 0");
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    boost::math::students_t_distribution<double> dist(dof);
    return boost::math::cdf(dist, x);
}

double mvn_logpdf_cholesky(const Vector& x, const Vector& mean, const Matrix& lower) {
    const Vector z = lower.triangularView<Eigen::Lower>().solve(x - mean);
    const double d = double(x.size());
    return -0.5 * (d * kLogTwoPi + log_det_from_cholesky(lower) + z.squaredNorm());
}

double mvn_logpdf(const Vector& x, const MvnParams& p) {
    check_dims(x, p.mean.size(), p.cov);
    const Matrix lower = cholesky(p.cov, "normal covariance");
    return mvn_logpdf_cholesky(x, p.mean, lower);
}

double mvt_logpdf(const Vector& x, const MvtParams& p) {
    check_dims(x, p.location.size(), p.scale);
    if (!(p.dof > 0.0) || !std::isfinite(p.dof)) {
        fail(Errc::InvalidDof, "Student t requires finite dof > 0");
    }
    const Matrix lower = cholesky(p.scale, "t scale matrix");
    const Vector z = lower.triangularView<Eigen::Lower>().solve(x - p.location);
    const double d = double(x.size());
    const double nu = p.dof;
    return std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
           0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * log_det_from_cholesky(lower) -
           0.5 * (nu + d) * std::log1p(z.squaredNorm() / nu);
}

InverseWishart::InverseWishart(double dof, const Matrix& scale) : dof_(dof) {
    const double dim = double(scale.rows());
    if (!(dof > dim - 1.0) || !std::isfinite(dof)) {
        fail(Errc::InvalidDof, "inverse-Wishart requires dof > dim - 1 (dof = " +
                                   std::to_string(dof) + ", dim = " +
                                   std::to_string(scale.rows()) + ")");
    }
    scale_chol_ = cholesky(scale, "inverse-Wishart scale");
}

Matrix InverseWishart::sample(Rng& rng) const {
    const Eigen::Index d = scale_chol_.rows();
    // Bartlett factor of the Wishart W(dof, scale^{-1}).
    Matrix bartlett = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        bartlett(i, i) = std::sqrt(rng.chi_square(dof_ - double(i)));
        for (Eigen::Index j = 0; j < i; ++j) bartlett(i, j) = rng.normal();
    }
    // B = U A^{-T}; A^{-T} is upper triangular.
    const Matrix a_inv_t = bartlett.transpose().triangularView<Eigen::Upper>().solve(
        Matrix::Identity(d, d));
    const Matrix factor = scale_chol_ * a_inv_t;
    return symmetrize(factor * factor.transpose());
}

Matrix sample_inv_wishart(double dof, const Matrix& scale, Rng& rng) {
    return InverseWishart(dof, scale).sample(rng);
}

} // namespace cbf
