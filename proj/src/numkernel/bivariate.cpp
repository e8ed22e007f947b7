// Closed-form bivariate normal and t rectangle kernels (after A. Genz's
// BVNU / BVTL routines).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cbf/distributions.hpp"
#include "cbf/orthant.hpp"

namespace cbf {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Legendre {
    int n;
    const double* w;
    const double* x;
};

constexpr double kW6[3] = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr double kX6[3] = {0.9324695142031522, 0.6612093864662647, 0.2386191860831970};
constexpr double kW12[6] = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                            0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr double kX12[6] = {0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
                            0.5873179542866171, 0.3678314989981802, 0.1252334085114692};
constexpr double kW20[10] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                             0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                             0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                             0.1527533871307259};
constexpr double kX20[10] = {0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
                             0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
                             0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
                             0.07652652113349733};

Legendre rule_for(double r) {
    const double ar = std::abs(r);
    if (ar < 0.3) return {3, kW6, kX6};
    if (ar < 0.75) return {6, kW12, kX12};
    return {10, kW20, kX20};
}

} // namespace

double bvn_upper(double h, double k, double r) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (h == inf || k == inf) return 0.0;
    if (h == -inf) return k == -inf ? 1.0 : normal_cdf(-k);
    if (k == -inf) return normal_cdf(-h);
    if (r == 0.0) return normal_cdf(-h) * normal_cdf(-k);

    const Legendre rule = rule_for(r);
    double hk = h * k;
    double bvn = 0.0;
    if (std::abs(r) < 0.925) {
        const double hs = 0.5 * (h * h + k * k);
        const double asr = 0.5 * std::asin(r);
        for (int i = 0; i < rule.n; ++i) {
            for (double sign : {-1.0, 1.0}) {
                const double sn = std::sin(asr * (1.0 + sign * rule.x[i]));
                bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
            }
        }
        bvn = bvn * asr / kTwoPi + normal_cdf(-h) * normal_cdf(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (std::abs(r) < 1.0) {
            const double as = 1.0 - r * r;
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 80.0;
            double asr = -0.5 * (bs / as + hk);
            if (asr > -100.0) {
                bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
            }
            if (hk > -100.0) {
                const double b = std::sqrt(bs);
                const double sp = std::sqrt(kTwoPi) * normal_cdf(-b / a);
                bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
            }
            a *= 0.5;
            double sum = 0.0;
            for (int i = 0; i < rule.n; ++i) {
                for (double sign : {-1.0, 1.0}) {
                    const double ax = a * (1.0 + sign * rule.x[i]);
                    const double xs = ax * ax;
                    asr = -0.5 * (bs / xs + hk);
                    if (asr > -100.0) {
                        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
                        const double rs = std::sqrt(1.0 - xs);
                        const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
                        sum += rule.w[i] * std::exp(asr) * (sp - ep);
                    }
                }
            }
            bvn = (a * sum - bvn) / kTwoPi;
        }
        if (r > 0.0) {
            bvn += normal_cdf(-std::max(h, k));
        } else if (h >= k) {
            bvn = -bvn;
        } else {
            const double l = h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
            bvn = l - bvn;
        }
    }
    return std::clamp(bvn, 0.0, 1.0);
}

double bvt_lower(int nu, double dh, double dk, double r) {
    constexpr double eps = 1e-15;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (nu < 1) return bvn_upper(-dh, -dk, r);
    if (dh == -inf || dk == -inf) return 0.0;
    if (dh == inf) return student_t_cdf(dk, nu);
    if (dk == inf) return student_t_cdf(dh, nu);
    if (1.0 - r <= eps) return student_t_cdf(std::min(dh, dk), nu);
    if (r + 1.0 <= eps) {
        return dh > -dk ? student_t_cdf(dh, nu) - student_t_cdf(-dk, nu) : 0.0;
    }
    const double pi = std::numbers::pi;
    const double fnu = double(nu);
    const double snu = std::sqrt(fnu);
    const double ors = 1.0 - r * r;
    const double hrk = dh - r * dk;
    const double krh = dk - r * dh;
    double xnhk = 0.0, xnkh = 0.0;
    if (std::abs(hrk) + ors > 0.0) {
        xnhk = hrk * hrk / (hrk * hrk + ors * (fnu + dk * dk));
        xnkh = krh * krh / (krh * krh + ors * (fnu + dh * dh));
    }
    const double hs = (dh - r * dk) < 0.0 ? -1.0 : 1.0;
    const double ks = (dk - r * dh) < 0.0 ? -1.0 : 1.0;
    double bvt;
    if (nu % 2 == 0) {
        bvt = std::atan2(std::sqrt(ors), -r) / kTwoPi;
        double gmph = dh / std::sqrt(16.0 * (fnu + dh * dh));
        double gmpk = dk / std::sqrt(16.0 * (fnu + dk * dk));
        double btnckh = 2.0 * std::atan2(std::sqrt(xnkh), std::sqrt(1.0 - xnkh)) / pi;
        double btpdkh = 2.0 * std::sqrt(xnkh * (1.0 - xnkh)) / pi;
        double btnchk = 2.0 * std::atan2(std::sqrt(xnhk), std::sqrt(1.0 - xnhk)) / pi;
        double btpdhk = 2.0 * std::sqrt(xnhk * (1.0 - xnhk)) / pi;
        for (int j = 1; j <= nu / 2; ++j) {
            const double fj = double(j);
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btnckh += btpdkh;
            btpdkh = 2.0 * fj * btpdkh * (1.0 - xnkh) / (2.0 * fj + 1.0);
            btnchk += btpdhk;
            btpdhk = 2.0 * fj * btpdhk * (1.0 - xnhk) / (2.0 * fj + 1.0);
            gmph = gmph * (2.0 * fj - 1.0) / (2.0 * fj * (1.0 + dh * dh / fnu));
            gmpk = gmpk * (2.0 * fj - 1.0) / (2.0 * fj * (1.0 + dk * dk / fnu));
        }
    } else {
        const double qhrk = std::sqrt(dh * dh + dk * dk - 2.0 * r * dh * dk + fnu * ors);
        const double hkrn = dh * dk + r * fnu;
        const double hkn = dh * dk - fnu;
        const double hpk = dh + dk;
        bvt = std::atan2(-snu * (hkn * qhrk + hpk * hkrn), hkn * hkrn - fnu * hpk * qhrk) / kTwoPi;
        if (bvt < -eps) bvt += 1.0;
        double gmph = dh / (kTwoPi * snu * (1.0 + dh * dh / fnu));
        double gmpk = dk / (kTwoPi * snu * (1.0 + dk * dk / fnu));
        double btnckh = std::sqrt(xnkh);
        double btpdkh = btnckh;
        double btnchk = std::sqrt(xnhk);
        double btpdhk = btnchk;
        for (int j = 1; j <= (nu - 1) / 2; ++j) {
            const double fj = double(j);
            bvt += gmph * (1.0 + ks * btnckh);
            bvt += gmpk * (1.0 + hs * btnchk);
            btpdkh = (2.0 * fj - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * fj);
            btnckh += btpdkh;
            btpdhk = (2.0 * fj - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * fj);
            btnchk += btpdhk;
            gmph = gmph * 2.0 * fj / ((2.0 * fj + 1.0) * (1.0 + dh * dh / fnu));
            gmpk = gmpk * 2.0 * fj / ((2.0 * fj + 1.0) * (1.0 + dk * dk / fnu));
        }
    }
    return std::clamp(bvt, 0.0, 1.0);
}

} // namespace cbf
