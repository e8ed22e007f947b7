// AVX2 kernels: four integration points (or four hit-test points) per lane
// group. Compiled with -mavx2 -mfma and only called after a CPUID check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "cbf/simd/kernels.hpp"
#include "vecmath_avx2.hpp"

namespace cbf::simd::detail {

using namespace cbf::simd::avx2;

namespace {

struct alignas(32) Lane {
    vd v;
};

inline vd load_or_one(const double* p, std::size_t i) {
    return p ? _mm256_loadu_pd(p + i) : set1(1.0);
}

// Multiplying an infinite limit by the scale must stay infinite, and a zero
// shift must not turn it into NaN; both hold for finite positive scales.
void genz_block(const GenzProblem& pb, const double* points, const double* scale,
                std::size_t count, std::size_t i, double* out, Lane* y) {
    const int d = pb.dim;
    const vd u = load_or_one(scale, i);
    vd shift = _mm256_setzero_pd();
    vd f = set1(1.0);
    for (int k = 0; k < d; ++k) {
        const vd inv_ckk = set1(1.0 / pb.chol[k * d + k]);
        const vd a = _mm256_mul_pd(_mm256_sub_pd(_mm256_mul_pd(set1(pb.lower[k]), u), shift), inv_ckk);
        const vd b = _mm256_mul_pd(_mm256_sub_pd(_mm256_mul_pd(set1(pb.upper[k]), u), shift), inv_ckk);
        const vd flip = _mm256_cmp_pd(a, _mm256_setzero_pd(), _CMP_GT_OQ);
        const vd lo = select(flip, vnormal_cdf(vneg(b)), vnormal_cdf(a));
        const vd hi = select(flip, vnormal_cdf(vneg(a)), vnormal_cdf(b));
        const vd width = _mm256_sub_pd(hi, lo);
        f = _mm256_mul_pd(f, width);
        if (k + 1 == d) break;
        const vd w = _mm256_loadu_pd(points + std::size_t(k) * count + i);
        vd q = vnormal_quantile(_mm256_add_pd(lo, _mm256_mul_pd(w, width)));
        q = select(flip, vneg(q), q);
        q = _mm256_max_pd(_mm256_min_pd(q, set1(40.0)), set1(-40.0));
        y[k].v = q;
        shift = _mm256_setzero_pd();
        const double* row = pb.chol + (k + 1) * d;
        for (int j = 0; j <= k; ++j) shift = _mm256_fmadd_pd(set1(row[j]), y[j].v, shift);
    }
    _mm256_storeu_pd(out + i, f);
}

} // namespace

void genz_integrand_avx2(const GenzProblem& pb, const double* points, const double* scale,
                         std::size_t count, double* out) {
    std::vector<Lane> y(std::size_t(std::max(pb.dim, 1)));
    const std::size_t full = count - count % 4;
    for (std::size_t i = 0; i < full; i += 4) genz_block(pb, points, scale, count, i, out, y.data());
    if (full < count) {
        // pad the tail into a scratch block of four points
        const std::size_t rem = count - full;
        const int dims = std::max(pb.dim - 1, 0);
        std::vector<double> pts(std::size_t(dims) * 4, 0.5);
        double sc[4] = {1.0, 1.0, 1.0, 1.0};
        for (int k = 0; k < dims; ++k) {
            for (std::size_t r = 0; r < rem; ++r) pts[std::size_t(k) * 4 + r] = points[std::size_t(k) * count + full + r];
        }
        if (scale) {
            for (std::size_t r = 0; r < rem; ++r) sc[r] = scale[full + r];
        }
        double tmp[4];
        genz_block(pb, pts.data(), scale ? sc : nullptr, 4, 0, tmp, y.data());
        std::copy(tmp, tmp + rem, out + full);
    }
}

std::size_t count_satisfied_avx2(const double* a, int rows, int cols, const double* rhs,
                                 const double* points, std::size_t count, unsigned char* hit) {
    std::size_t hits = 0;
    const std::size_t full = count - count % 4;
    for (std::size_t i = 0; i < full; i += 4) {
        int ok = 0xF;
        for (int r = 0; r < rows && ok; ++r) {
            vd s = _mm256_setzero_pd();
            for (int c = 0; c < cols; ++c) {
                const vd x = _mm256_loadu_pd(points + std::size_t(c) * count + i);
                s = _mm256_add_pd(s, _mm256_mul_pd(set1(a[r * cols + c]), x));
            }
            ok &= _mm256_movemask_pd(_mm256_cmp_pd(s, set1(rhs[r]), _CMP_GT_OQ));
        }
        hits += std::size_t(__builtin_popcount(unsigned(ok)));
        if (hit) {
            for (int lane = 0; lane < 4; ++lane) hit[i + std::size_t(lane)] = (ok >> lane) & 1;
        }
    }
    for (std::size_t i = full; i < count; ++i) {
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
