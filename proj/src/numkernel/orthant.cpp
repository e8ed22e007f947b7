#include "cbf/orthant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "cbf/error.hpp"

namespace cbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Student t 0.995 quantile with 11 dof (12 shifts).
constexpr double kShiftQuantile = 3.106;

void check_inputs(const Vector& lower, const Vector& upper, const Vector& mean, const Matrix& cov) {
    const auto d = lower.size();
    if (upper.size() != d || mean.size() != d || cov.rows() != d || cov.cols() != d) {
        fail(Errc::DimensionMismatch, "orthant: limits, location and scale disagree in dimension");
    }
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::isnan(lower[i]) || std::isnan(upper[i]) || !std::isfinite(mean[i])) {
            fail(Errc::NonFiniteInput, "orthant: non-finite limit or location");
        }
    }
    if (!cov.allFinite()) fail(Errc::NonFiniteInput, "orthant: non-finite scale matrix");
}

bool empty_box(const Vector& lower, const Vector& upper) {
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) return true;
    }
    return false;
}

double normal_interval(double a, double b) {
    // evaluate in the tail that keeps relative precision
    if (a > 0.0) return normal_cdf(-a) - normal_cdf(-b);
    return normal_cdf(b) - normal_cdf(a);
}

double t_interval(double a, double b, double dof) {
    auto cdf = [dof](double x) {
        if (x == kInf) return 1.0;
        if (x == -kInf) return 0.0;
        return student_t_cdf(x, dof);
    };
    if (a > 0.0) return cdf(-a) - cdf(-b);
    return cdf(b) - cdf(a);
}

double normal_density(double x) {
    if (!std::isfinite(x)) return 0.0;
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Reordered, centred and factored rectangle problem.
struct Prepared {
    int dim = 0;
    std::vector<double> chol;  // row-major lower
    std::vector<double> lower;
    std::vector<double> upper;

    simd::GenzProblem problem() const { return {dim, chol.data(), lower.data(), upper.data()}; }
};

/// Cholesky factorization with Genz-Bretz variable prioritization: at each
/// step the variable with the smallest conditional interval probability goes
/// next, which concentrates the variation in the first integration variables.
Prepared prepare(const Vector& lower, const Vector& upper, const Vector& centre, const Matrix& cov) {
    const int d = int(lower.size());
    Matrix c = cov;
    Vector a = lower - centre;
    Vector b = upper - centre;
    Matrix l = Matrix::Zero(d, d);
    std::vector<double> y(std::size_t(d), 0.0);
    const double scale = cov.diagonal().maxCoeff();
    for (int i = 0; i < d; ++i) {
        int best = i;
        double best_prob = kInf;
        for (int j = i; j < d; ++j) {
            double var = c(j, j);
            double shift = 0.0;
            for (int k = 0; k < i; ++k) {
                var -= l(j, k) * l(j, k);
                shift += l(j, k) * y[std::size_t(k)];
            }
            if (var <= kPivotTolerance * scale) continue;
            const double s = std::sqrt(var);
            const double prob = normal_interval((a[j] - shift) / s, (b[j] - shift) / s);
            if (prob < best_prob) {
                best_prob = prob;
                best = j;
            }
        }
        if (best_prob == kInf) fail(Errc::NotPositiveDefinite, "orthant: scale matrix is not positive definite");
        if (best != i) {
            std::swap(a[i], a[best]);
            std::swap(b[i], b[best]);
            c.row(i).swap(c.row(best));
            c.col(i).swap(c.col(best));
            l.row(i).swap(l.row(best));
        }
        double var = c(i, i);
        for (int k = 0; k < i; ++k) var -= l(i, k) * l(i, k);
        const double s = std::sqrt(var);
        l(i, i) = s;
        for (int j = i + 1; j < d; ++j) {
            double v = c(j, i);
            for (int k = 0; k < i; ++k) v -= l(j, k) * l(i, k);
            l(j, i) = v / s;
        }
        double shift = 0.0;
        for (int k = 0; k < i; ++k) shift += l(i, k) * y[std::size_t(k)];
        const double lo = (a[i] - shift) / s;
        const double hi = (b[i] - shift) / s;
        const double prob = std::max(normal_interval(lo, hi), 1e-300);
        // conditional mean of a truncated standard normal
        y[std::size_t(i)] = (normal_density(lo) - normal_density(hi)) / prob;
    }
    Prepared p;
    p.dim = d;
    p.chol.resize(std::size_t(d) * std::size_t(d));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) p.chol[std::size_t(i * d + j)] = l(i, j);
    }
    p.lower.assign(a.data(), a.data() + d);
    p.upper.assign(b.data(), b.data() + d);
    return p;
}

const std::vector<double>& lattice_generators(int count) {
    static thread_local std::vector<double> gens;
    if (int(gens.size()) < count) {
        gens.clear();
        for (int n = 2; int(gens.size()) < std::max(count, 16); ++n) {
            bool prime = true;
            for (int f = 2; f * f <= n; ++f) {
                if (n % f == 0) {
                    prime = false;
                    break;
                }
            }
            if (prime) gens.push_back(std::sqrt(double(n)));
        }
    }
    return gens;
}

/// Integrand evaluator on a randomly shifted Richtmyer lattice with the tent
/// transform and antithetic pairs. `tdof` > 0 adds one coordinate carrying the
/// chi mixing variable of a Student t.
class LatticeEvaluator {
public:
    LatticeEvaluator(const Prepared& p, double tdof)
        : prep_(p), tdof_(tdof), coords_(std::max(p.dim - 1, 0) + (tdof > 0.0 ? 1 : 0)) {}

    int coords() const { return coords_; }

    /// Mean of 2n integrand values for lattice size n and the given shift.
    double run(std::size_t n, const std::vector<double>& shift) {
        const auto& gens = lattice_generators(coords_);
        const std::size_t total = 2 * n;
        const int kc = std::max(prep_.dim - 1, 0);
        points_.assign(std::size_t(std::max(kc, 1)) * total, 0.5);
        scale_.resize(total);
        values_.resize(total);
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < coords_; ++k) {
                const double raw = double(i + 1) * gens[std::size_t(k)] + shift[std::size_t(k)];
                const double x = raw - std::floor(raw);
                const double t = std::abs(2.0 * x - 1.0);
                const double w0 = std::clamp(t, 1e-300, 1.0 - 1e-16);
                const double w1 = std::clamp(1.0 - t, 1e-300, 1.0 - 1e-16);
                if (k < kc) {
                    points_[std::size_t(k) * total + i] = w0;
                    points_[std::size_t(k) * total + n + i] = w1;
                } else {
                    scale_[i] = chi_scale(w0);
                    scale_[n + i] = chi_scale(w1);
                }
            }
        }
        const auto problem = prep_.problem();
        simd::kernels().genz_integrand(problem, points_.data(), tdof_ > 0.0 ? scale_.data() : nullptr,
                                       total, values_.data());
        double sum = 0.0;
        for (double v : values_) sum += v;
        return sum / double(total);
    }

private:
    double chi_scale(double w) const {
        const double half = 0.5 * tdof_;
        return std::sqrt(2.0 * boost::math::gamma_p_inv(half, w) / tdof_);
    }

    const Prepared& prep_;
    double tdof_;
    int coords_;
    std::vector<double> points_;
    std::vector<double> scale_;
    std::vector<double> values_;
};

ProbabilityEstimate adaptive(const Prepared& prep, double tdof, Rng& rng, const OrthantOptions& opts) {
    LatticeEvaluator eval(prep, tdof);
    const int shifts = std::max(opts.shifts, 2);
    std::vector<double> shift(std::size_t(eval.coords()));
    std::size_t n = 64;
    std::size_t evaluations = 0;
    double weight_sum = 0.0;
    double weighted = 0.0;
    ProbabilityEstimate out;
    bool have = false;
    while (true) {
        const std::size_t cost = 2 * n * std::size_t(shifts);
        if (have && evaluations + cost > opts.max_evaluations) break;
        double mean = 0.0;
        double m2 = 0.0;
        for (int s = 0; s < shifts; ++s) {
            for (auto& v : shift) v = rng.uniform();
            const double v = eval.run(n, shift);
            const double delta = v - mean;
            mean += delta / double(s + 1);
            m2 += delta * (v - mean);
        }
        evaluations += cost;
        const double var = m2 / double(shifts - 1) / double(shifts);
        if (var <= 0.0) {
            out = {mean, 0.0, evaluations};
            return out;
        }
        weighted += mean / var;
        weight_sum += 1.0 / var;
        have = true;
        out.value = weighted / weight_sum;
        out.error = kShiftQuantile * std::sqrt(1.0 / weight_sum);
        out.evaluations = evaluations;
        if (out.error < opts.abs_tol) break;
        n *= 2;
    }
    out.value = std::clamp(out.value, 0.0, 1.0);
    return out;
}

/// Drops coordinates whose interval is the whole line; they integrate to one.
void drop_unbounded(Vector& lower, Vector& upper, Vector& centre, Matrix& cov) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (!(lower[i] == -kInf && upper[i] == kInf)) keep.push_back(i);
    }
    if (Eigen::Index(keep.size()) == lower.size()) return;
    const auto k = Eigen::Index(keep.size());
    Vector lo(k), hi(k), c(k);
    Matrix s(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        lo[i] = lower[keep[std::size_t(i)]];
        hi[i] = upper[keep[std::size_t(i)]];
        c[i] = centre[keep[std::size_t(i)]];
        for (Eigen::Index j = 0; j < k; ++j) s(i, j) = cov(keep[std::size_t(i)], keep[std::size_t(j)]);
    }
    lower = std::move(lo);
    upper = std::move(hi);
    centre = std::move(c);
    cov = std::move(s);
}

double bvn_rectangle(const Vector& lo, const Vector& hi, const Vector& mean, const Matrix& cov) {
    const double s1 = std::sqrt(cov(0, 0));
    const double s2 = std::sqrt(cov(1, 1));
    const double r = std::clamp(cov(0, 1) / (s1 * s2), -1.0, 1.0);
    const double a1 = (lo[0] - mean[0]) / s1, b1 = (hi[0] - mean[0]) / s1;
    const double a2 = (lo[1] - mean[1]) / s2, b2 = (hi[1] - mean[1]) / s2;
    const double p = bvn_upper(a1, a2, r) - bvn_upper(b1, a2, r) - bvn_upper(a1, b2, r) +
                     bvn_upper(b1, b2, r);
    return std::clamp(p, 0.0, 1.0);
}

double bvt_rectangle(int nu, const Vector& lo, const Vector& hi, const Vector& loc, const Matrix& sc) {
    const double s1 = std::sqrt(sc(0, 0));
    const double s2 = std::sqrt(sc(1, 1));
    const double r = std::clamp(sc(0, 1) / (s1 * s2), -1.0, 1.0);
    const double a1 = (lo[0] - loc[0]) / s1, b1 = (hi[0] - loc[0]) / s1;
    const double a2 = (lo[1] - loc[1]) / s2, b2 = (hi[1] - loc[1]) / s2;
    // upper orthants via the reflected lower CDF keep the small tails precise
    auto upper = [&](double h, double k) { return bvt_lower(nu, -h, -k, r); };
    const double p = upper(a1, a2) - upper(b1, a2) - upper(a1, b2) + upper(b1, b2);
    return std::clamp(p, 0.0, 1.0);
}

bool is_integer(double x) { return x == std::floor(x) && x < 1e6; }

} // namespace

ProbabilityEstimate mvn_orthant(const Vector& lower, const Vector& upper, const MvnParams& p, Rng& rng,
                                const OrthantOptions& opts) {
    check_inputs(lower, upper, p.mean, p.cov);
    if (empty_box(lower, upper)) return {};
    Vector lo = lower, hi = upper, mean = p.mean;
    Matrix cov = p.cov;
    drop_unbounded(lo, hi, mean, cov);
    const auto d = lo.size();
    if (d == 0) return {1.0, 0.0, 0};
    if (d == 1) {
        if (!(cov(0, 0) > 0.0)) fail(Errc::NotPositiveDefinite, "orthant: non-positive variance");
        const double s = std::sqrt(cov(0, 0));
        return {normal_interval((lo[0] - mean[0]) / s, (hi[0] - mean[0]) / s), 0.0, 1};
    }
    if (d == 2) {
        Matrix l;
        if (!try_cholesky(cov, l)) fail(Errc::NotPositiveDefinite, "orthant: scale matrix is not positive definite");
        return {bvn_rectangle(lo, hi, mean, cov), 0.0, 1};
    }
    return adaptive(prepare(lo, hi, mean, cov), 0.0, rng, opts);
}

ProbabilityEstimate mvt_orthant(const Vector& lower, const Vector& upper, const MvtParams& p, Rng& rng,
                                const OrthantOptions& opts) {
    check_inputs(lower, upper, p.location, p.scale);
    if (!(p.dof > 0.0) || !std::isfinite(p.dof)) fail(Errc::InvalidDof, "orthant: dof must be positive");
    if (empty_box(lower, upper)) return {};
    Vector lo = lower, hi = upper, loc = p.location;
    Matrix sc = p.scale;
    drop_unbounded(lo, hi, loc, sc);
    const auto d = lo.size();
    if (d == 0) return {1.0, 0.0, 0};
    if (d == 1) {
        if (!(sc(0, 0) > 0.0)) fail(Errc::NotPositiveDefinite, "orthant: non-positive scale");
        const double s = std::sqrt(sc(0, 0));
        return {t_interval((lo[0] - loc[0]) / s, (hi[0] - loc[0]) / s, p.dof), 0.0, 1};
    }
    if (d == 2 && is_integer(p.dof)) {
        Matrix l;
        if (!try_cholesky(sc, l)) fail(Errc::NotPositiveDefinite, "orthant: scale matrix is not positive definite");
        return {bvt_rectangle(int(p.dof), lo, hi, loc, sc), 0.0, 1};
    }
    return adaptive(prepare(lo, hi, loc, sc), p.dof, rng, opts);
}

double mvn_rectangle_rqmc(const Vector& lower, const Vector& upper, const Vector& mean, const Matrix& cov,
                          std::size_t count, Rng& rng) {
    check_inputs(lower, upper, mean, cov);
    if (empty_box(lower, upper)) return 0.0;
    Vector lo = lower, hi = upper, centre = mean;
    Matrix c = cov;
    drop_unbounded(lo, hi, centre, c);
    if (lo.size() == 0) return 1.0;
    const Prepared prep = prepare(lo, hi, centre, c);
    LatticeEvaluator eval(prep, 0.0);
    std::vector<double> shift(std::size_t(eval.coords()));
    for (auto& v : shift) v = rng.uniform();
    return eval.run(std::max<std::size_t>(count / 2, 1), shift);
}

double mvn_rectangle_fast(const Vector& lower, const Vector& upper, const Vector& mean, const Matrix& cov,
                          std::size_t count, Rng& rng) {
    check_inputs(lower, upper, mean, cov);
    if (empty_box(lower, upper)) return 0.0;
    Vector lo = lower, hi = upper, centre = mean;
    Matrix c = cov;
    drop_unbounded(lo, hi, centre, c);
    const auto d = lo.size();
    if (d == 0) return 1.0;
    if (d == 1) {
        if (!(c(0, 0) > 0.0)) fail(Errc::NotPositiveDefinite, "orthant: non-positive variance");
        const double s = std::sqrt(c(0, 0));
        return normal_interval((lo[0] - centre[0]) / s, (hi[0] - centre[0]) / s);
    }
    if (d == 2) return bvn_rectangle(lo, hi, centre, c);
    const Prepared prep = prepare(lo, hi, centre, c);
    LatticeEvaluator eval(prep, 0.0);
    std::vector<double> shift(std::size_t(eval.coords()));
    for (auto& v : shift) v = rng.uniform();
    return eval.run(std::max<std::size_t>(count / 2, 1), shift);
}

} // namespace cbf
