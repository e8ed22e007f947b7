#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cbf/evidence.hpp"
#include "cbf/parallel.hpp"

namespace cbf::detail {

inline Quantity from_log(double log_value) {
    Quantity q;
    q.log_value = log_value;
    q.value = std::exp(log_value);
    return q;
}

/// Probability entering a log: values under the floor are raised and flagged.
inline Quantity from_probability(double p) {
    Quantity q;
    q.value = std::clamp(p, 0.0, 1.0);
    q.clipped = q.value < kProbabilityFloor;
    q.log_value = std::log(std::max(q.value, kProbabilityFloor));
    return q;
}

/// Mean and standard error of per-draw densities given on the log scale.
inline Quantity reduce_log_mean(const std::vector<double>& logs) {
    const double n = double(logs.size());
    const double mx = *std::max_element(logs.begin(), logs.end());
    if (!std::isfinite(mx)) return from_log(-std::numeric_limits<double>::infinity());
    CompensatedSum s;
    for (double l : logs) s.add(std::exp(l - mx));
    const double mean = s.value() / n;
    CompensatedSum ss;
    for (double l : logs) {
        const double d = std::exp(l - mx) - mean;
        ss.add(d * d);
    }
    const double se = std::sqrt(ss.value() / (n - 1.0) / n);
    Quantity q = from_log(mx + std::log(mean));
    q.mc_se = std::exp(mx) * se;
    return q;
}

/// Mean and standard error of per-draw probabilities.
inline Quantity reduce_mean(const std::vector<double>& values) {
    const double n = double(values.size());
    CompensatedSum s;
    for (double v : values) s.add(v);
    const double mean = s.value() / n;
    CompensatedSum ss;
    for (double v : values) ss.add((v - mean) * (v - mean));
    Quantity q = from_probability(mean);
    q.mc_se = std::sqrt(ss.value() / (n - 1.0) / n);
    return q;
}

/// Self-normalized weighted mean with a delta-method standard error.
inline Quantity reduce_weighted(const std::vector<double>& values, const std::vector<double>& log_weights) {
    const double mx = *std::max_element(log_weights.begin(), log_weights.end());
    CompensatedSum sw, swx;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double w = std::exp(log_weights[i] - mx);
        sw.add(w);
        swx.add(w * values[i]);
    }
    const double mean = swx.value() / sw.value();
    CompensatedSum ss;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = std::exp(log_weights[i] - mx) * (values[i] - mean);
        ss.add(d * d);
    }
    Quantity q = from_probability(mean);
    q.mc_se = std::sqrt(ss.value()) / sw.value();
    return q;
}

/// Hit ratio with the Agresti-Coull standard error (z = 1.96).
inline Quantity reduce_hits(const std::vector<double>& hits) {
    const double n = double(hits.size());
    CompensatedSum s;
    for (double v : hits) s.add(v);
    const double x = s.value();
    constexpr double z2 = 1.96 * 1.96;
    const double nt = n + z2;
    const double pt = (x + 0.5 * z2) / nt;
    Quantity q = from_probability(x / n);
    q.mc_se = std::sqrt(pt * (1.0 - pt) / nt);
    return q;
}

} // namespace cbf::detail
