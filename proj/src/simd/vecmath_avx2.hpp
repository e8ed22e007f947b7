#pragma once
// Four-lane double-precision elementary functions for the AVX2 kernels.
// Only compiled into translation units built with -mavx2 -mfma.

#include <immintrin.h>

namespace cbf::simd::avx2 {

using vd = __m256d;

inline vd set1(double x) { return _mm256_set1_pd(x); }
inline vd vabs(vd x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }
inline vd vneg(vd x) { return _mm256_xor_pd(x, _mm256_set1_pd(-0.0)); }
inline vd select(vd mask, vd if_true, vd if_false) {
    return _mm256_blendv_pd(if_false, if_true, mask);
}

template <int N>
inline vd horner(vd x, const double (&c)[N]) {
    vd r = set1(c[N - 1]);
    for (int i = N - 2; i >= 0; --i) r = _mm256_fmadd_pd(r, x, set1(c[i]));
    return r;
}

/// exp(x) for x in [-700, 700]: Cody-Waite reduction by ln 2 and a degree-13
/// Taylor polynomial on |r| <= ln2/2.
inline vd vexp(vd x) {
    x = _mm256_max_pd(_mm256_min_pd(x, set1(700.0)), set1(-700.0));
    const vd n = _mm256_round_pd(_mm256_mul_pd(x, set1(1.4426950408889634074)),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    vd r = _mm256_fnmadd_pd(n, set1(0.693145751953125), x);
    r = _mm256_fnmadd_pd(n, set1(1.42860682030941723212e-6), r);
    static constexpr double taylor[14] = {1.0,
                                          1.0,
                                          1.0 / 2,
                                          1.0 / 6,
                                          1.0 / 24,
                                          1.0 / 120,
                                          1.0 / 720,
                                          1.0 / 5040,
                                          1.0 / 40320,
                                          1.0 / 362880,
                                          1.0 / 3628800,
                                          1.0 / 39916800,
                                          1.0 / 479001600,
                                          1.0 / 6227020800.0};
    const vd p = horner(r, taylor);
    // 2^n through the exponent field
    const __m128i ni = _mm256_cvtpd_epi32(n);
    const __m256i e = _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(ni),
                                                         _mm256_set1_epi64x(1023)),
                                        52);
    return _mm256_mul_pd(p, _mm256_castsi256_pd(e));
}

/// log(x) for positive normal x: mantissa in [sqrt(1/2), sqrt(2)) and the
/// atanh series 2(s + s^3/3 + ...) with s = (m-1)/(m+1), |s| < 0.172.
inline vd vlog(vd x) {
    const __m256i bits = _mm256_castpd_si256(x);
    __m256i expo = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
    const __m256i mant_bits = _mm256_or_si256(
        _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
        _mm256_set1_epi64x(0x3FF0000000000000LL));
    vd m = _mm256_castsi256_pd(mant_bits);
    const vd big = _mm256_cmp_pd(m, set1(1.4142135623730950488), _CMP_GT_OQ);
    m = select(big, _mm256_mul_pd(m, set1(0.5)), m);
    expo = _mm256_add_epi64(expo, _mm256_and_si256(_mm256_castpd_si256(big),
                                                   _mm256_set1_epi64x(1)));
    // int64 -> double for |e| < 2^31
    alignas(32) long long ev[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(ev), expo);
    const vd ef = _mm256_set_pd(double(ev[3]), double(ev[2]), double(ev[1]), double(ev[0]));

    const vd s = _mm256_div_pd(_mm256_sub_pd(m, set1(1.0)), _mm256_add_pd(m, set1(1.0)));
    const vd s2 = _mm256_mul_pd(s, s);
    static constexpr double odd[11] = {1.0,      1.0 / 3,  1.0 / 5,  1.0 / 7,
                                       1.0 / 9,  1.0 / 11, 1.0 / 13, 1.0 / 15,
                                       1.0 / 17, 1.0 / 19, 1.0 / 21};
    const vd series = _mm256_mul_pd(_mm256_mul_pd(set1(2.0), s), horner(s2, odd));
    const vd hi = _mm256_fmadd_pd(ef, set1(0.693145751953125), series);
    return _mm256_fmadd_pd(ef, set1(1.42860682030941723212e-6), hi);
}

/// Standard normal CDF using Hart's algorithm 5666 (as in Genz's MVNPHI),
/// accurate to ~1e-15 absolute.
inline vd vnormal_cdf(vd z) {
    static constexpr double p[7] = {220.2068679123761, 221.2135961699311, 112.0792914978709,
                                    33.91286607838300, 6.373962203531650, .7003830644436881,
                                    .03526249659989109};
    static constexpr double q[8] = {440.4137358247522, 793.8265125199484, 637.3336333788311,
                                    296.5642487796737, 86.78073220294608, 16.06417757920695,
                                    1.755667163182642, .08838834764831844};
    const vd za = _mm256_min_pd(vabs(z), set1(40.0));
    const vd expntl = vexp(_mm256_mul_pd(set1(-0.5), _mm256_mul_pd(za, za)));
    const vd rational = _mm256_div_pd(_mm256_mul_pd(expntl, horner(za, p)), horner(za, q));
    // continued fraction for the far tail
    vd cf = _mm256_add_pd(za, set1(0.65));
    cf = _mm256_add_pd(za, _mm256_div_pd(set1(4.0), cf));
    cf = _mm256_add_pd(za, _mm256_div_pd(set1(3.0), cf));
    cf = _mm256_add_pd(za, _mm256_div_pd(set1(2.0), cf));
    cf = _mm256_add_pd(za, _mm256_div_pd(set1(1.0), cf));
    const vd tail = _mm256_div_pd(expntl, _mm256_mul_pd(cf, set1(2.506628274631001)));
    vd pr = select(_mm256_cmp_pd(za, set1(7.071067811865475), _CMP_LT_OQ), rational, tail);
    pr = select(_mm256_cmp_pd(za, set1(37.0), _CMP_GT_OQ), _mm256_setzero_pd(), pr);
    return select(_mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_GT_OQ),
                  _mm256_sub_pd(set1(1.0), pr), pr);
}

/// Standard normal quantile, Wichura AS241, with lanes blended across the
/// central and two tail branches. Input must lie in (0, 1).
inline vd vnormal_quantile(vd pv) {
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
    pv = _mm256_max_pd(_mm256_min_pd(pv, set1(1.0 - 1e-16)), set1(1e-300));
    const vd q = _mm256_sub_pd(pv, set1(0.5));
    const vd rc = _mm256_fnmadd_pd(q, q, set1(0.180625));
    const vd central = _mm256_div_pd(_mm256_mul_pd(q, horner(rc, a)), horner(rc, b));

    const vd neg = _mm256_cmp_pd(q, _mm256_setzero_pd(), _CMP_LT_OQ);
    const vd tailp = select(neg, pv, _mm256_sub_pd(set1(1.0), pv));
    const vd r = _mm256_sqrt_pd(vneg(vlog(tailp)));
    const vd r1 = _mm256_sub_pd(r, set1(1.6));
    const vd near = _mm256_div_pd(horner(r1, c), horner(r1, d));
    const vd r2 = _mm256_sub_pd(r, set1(5.0));
    const vd far = _mm256_div_pd(horner(r2, e), horner(r2, f));
    vd tail = select(_mm256_cmp_pd(r, set1(5.0), _CMP_LE_OQ), near, far);
    tail = select(neg, vneg(tail), tail);
    return select(_mm256_cmp_pd(vabs(q), set1(0.425), _CMP_LE_OQ), central, tail);
}

} // namespace cbf::simd::avx2
