#pragma once

#include <cstddef>

#include "cbf/distributions.hpp"
#include "cbf/rng.hpp"
#include "cbf/simd/kernels.hpp"

namespace cbf {

struct ProbabilityEstimate {
    double value = 0.0;
    /// ~99% bound on |truth - value|; zero for closed-form evaluations.
    double error = 0.0;
    std::size_t evaluations = 0;
};

struct OrthantOptions {
    double abs_tol = 1e-4;
    std::size_t max_evaluations = 1'000'000;
    /// Independent random shifts of the lattice; the error bound is the
    /// Student t 0.995 quantile for (shifts - 1) dof times the shift SE.
    int shifts = 12;
};

/// P(lower < X < upper) for X ~ N(mean, cov). Closed form for d <= 2,
/// randomized lattice QMC (Genz separation of variables with variable
/// prioritization) above that. Limits may be infinite.
ProbabilityEstimate mvn_orthant(const Vector& lower, const Vector& upper, const MvnParams& p,
                                Rng& rng, const OrthantOptions& opts = {});

/// Multivariate Student t counterpart; dof == 1 gives the Cauchy case.
/// Closed form for d == 1 and for d == 2 with integer dof.
ProbabilityEstimate mvt_orthant(const Vector& lower, const Vector& upper, const MvtParams& p,
                                Rng& rng, const OrthantOptions& opts = {});

/// One randomly shifted lattice estimate of a normal rectangle probability
/// (unbiased; no error estimate). `count` points, antithetic pairs included.
/// Used inside outer Monte Carlo loops where the outer average absorbs the
/// integration noise.
double mvn_rectangle_rqmc(const Vector& lower, const Vector& upper, const Vector& mean,
                          const Matrix& cov, std::size_t count, Rng& rng);

/// Normal rectangle probability evaluated exactly for d <= 2, by
/// mvn_rectangle_rqmc otherwise.
double mvn_rectangle_fast(const Vector& lower, const Vector& upper, const Vector& mean,
                          const Matrix& cov, std::size_t count, Rng& rng);

/// P(X > h, Y > k) for a standard bivariate normal with correlation r
/// (Genz's Gauss-Legendre scheme, ~1e-15 absolute).
double bvn_upper(double h, double k, double r);

/// P(X < h, Y < k) for a standard bivariate t with integer dof nu and
/// correlation r (Dunnett-Sobel series as organized by Genz).
double bvt_lower(int nu, double h, double k, double r);

} // namespace cbf
