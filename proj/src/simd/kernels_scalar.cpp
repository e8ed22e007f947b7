// Reference kernels. Built with -ffp-contract=off so the hit counter rounds
// exactly like the vector variant.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cbf/distributions.hpp"
#include "cbf/simd/kernels.hpp"

namespace cbf::simd::detail {

namespace {

constexpr double kQuantileClamp = 40.0;

inline double upper_tail(double x) { return normal_cdf(-x); }

} // namespace

void genz_integrand_scalar(const GenzProblem& pb, const double* points, const double* scale,
                           std::size_t count, double* out) {
    const int d = pb.dim;
    std::vector<double> y(std::size_t(std::max(d, 1)));
    for (std::size_t i = 0; i < count; ++i) {
        const double u = scale ? scale[i] : 1.0;
        double shift = 0.0;
        double f = 1.0;
        for (int k = 0; k < d; ++k) {
            const double ckk = pb.chol[k * d + k];
            const double a = (pb.lower[k] * u - shift) / ckk;
            const double b = (pb.upper[k] * u - shift) / ckk;
            // tails are handled in whichever orientation keeps precision
            const bool flip = a > 0.0;
            const double lo = flip ? upper_tail(b) : normal_cdf(a);
            const double hi = flip ? upper_tail(a) : normal_cdf(b);
            const double width = hi - lo;
            f *= width;
            if (k + 1 == d) break;
            const double w = points[std::size_t(k) * count + i];
            const double pq = std::clamp(lo + w * width, 1e-300, 1.0 - 1e-16);
            double q = normal_quantile(pq);
            if (flip) q = -q;
            q = std::clamp(q, -kQuantileClamp, kQuantileClamp);
            y[std::size_t(k)] = q;
            shift = 0.0;
            const double* row = pb.chol + (k + 1) * d;
            for (int j = 0; j <= k; ++j) shift += row[j] * y[std::size_t(j)];
        }
        out[i] = f;
    }
}

std::size_t count_satisfied_scalar(const double* a, int rows, int cols, const double* rhs,
                                   const double* points, std::size_t count, unsigned char* hit) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < count; ++i) {
        bool ok = true;
        for (int r = 0; r < rows && ok; ++r) {
            double s = 0.0;
            for (int c = 0; c < cols; ++c) s = s + a[r * cols + c] * points[std::size_t(c) * count + i];
            ok = s > rhs[r];
        }
        hits += ok ? 1 : 0;
        if (hit) hit[i] = ok ? 1 : 0;
    }
    return hits;
}

} // namespace cbf::simd::detail
