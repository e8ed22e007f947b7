#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "cbf/error.hpp"
#include "cbf/missing.hpp"
#include "cbf/parallel.hpp"

namespace cbf {

namespace {

bool same_stats(const SufficientStats& a, const SufficientStats& b) {
    if (a.groups.size() != b.groups.size()) return false;
    for (std::size_t j = 0; j < a.groups.size(); ++j) {
        const auto& x = a.groups[j];
        const auto& y = b.groups[j];
        if (x.n != y.n || x.xtx != y.xtx || x.xty != y.xty || x.yty != y.yty) return false;
    }
    return true;
}

struct Averaged {
    Quantity q;
    double sd = 0.0;
};

/// Arithmetic mean of the values (in log space to survive tiny densities).
/// Identical inputs are returned unchanged.
Averaged average(const std::vector<const Quantity*>& qs, bool probability) {
    const double M = double(qs.size());
    const bool identical = std::all_of(qs.begin(), qs.end(), [&](const Quantity* q) {
        return q->log_value == qs[0]->log_value && q->value == qs[0]->value && q->mc_se == qs[0]->mc_se &&
               q->cdf_error == qs[0]->cdf_error;
    });
    if (identical) return {*qs[0], 0.0};
    double mx = -std::numeric_limits<double>::infinity();
    for (const Quantity* q : qs) mx = std::max(mx, q->log_value);
    CompensatedSum s, se2, err;
    for (const Quantity* q : qs) {
        s.add(std::exp(q->log_value - mx));
        se2.add(q->mc_se * q->mc_se);
        err.add(q->cdf_error);
    }
    Averaged a;
    if (probability) {
        CompensatedSum v;
        for (const Quantity* q : qs) v.add(q->value);
        const double mean = v.value() / M;
        a.q.value = std::clamp(mean, 0.0, 1.0);
        a.q.clipped = a.q.value < kProbabilityFloor;
        a.q.log_value = std::log(std::max(a.q.value, kProbabilityFloor));
    } else {
        a.q.log_value = mx + std::log(s.value() / M);
        a.q.value = std::exp(a.q.log_value);
    }
    a.q.mc_se = std::sqrt(se2.value()) / M;
    a.q.cdf_error = err.value() / M;
    CompensatedSum dev;
    for (const Quantity* q : qs) dev.add((q->value - a.q.value) * (q->value - a.q.value));
    a.sd = qs.size() > 1 ? std::sqrt(dev.value() / (M - 1.0)) : 0.0;
    return a;
}

} // namespace

AveragedReport average_evidence(const std::vector<ConstrainedModel>& models, const ImputedSet& set, const McConfig& cfg,
                                std::vector<double> prior_probs) {
    if (set.imputations.empty()) fail(Errc::InvalidConfig, "no imputed data sets");
    const std::size_t M = set.imputations.size();
    std::vector<SufficientStats> stats;
    std::vector<EvidenceReport> reports;
    std::vector<std::size_t> report_of(M);
    for (std::size_t m = 0; m < M; ++m) {
        SufficientStats st = sufficient_stats(set.imputations[m]);
        std::size_t found = stats.size();
        for (std::size_t k = 0; k < stats.size(); ++k) {
            if (same_stats(stats[k], st)) {
                found = k;
                break;
            }
        }
        if (found == stats.size()) {
            reports.push_back(evaluate(models, st, cfg, prior_probs));
            stats.push_back(std::move(st));
        }
        report_of[m] = found;
    }

    AveragedReport out;
    out.imputations = int(M);
    out.report = reports[0];
    out.between_sd.resize(models.size());
    std::vector<double> lbf(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        ModelEvidence& e = out.report.models[i];
        QuantitySpread& sd = out.between_sd[i];
        std::set<std::string> seen(e.warnings.begin(), e.warnings.end());
        for (std::size_t m = 0; m < M; ++m) {
            for (const auto& w : reports[report_of[m]].models[i].warnings) {
                if (seen.insert(w).second) e.warnings.push_back(w);
            }
        }
        auto fold = [&](std::optional<Quantity> ModelEvidence::*field, std::optional<double>& spread, bool prob) {
            if (!(e.*field)) return;
            std::vector<const Quantity*> qs;
            for (std::size_t m = 0; m < M; ++m) qs.push_back(&*(reports[report_of[m]].models[i].*field));
            const Averaged a = average(qs, prob);
            e.*field = a.q;
            spread = a.sd;
        };
        fold(&ModelEvidence::fE, sd.fE, false);
        fold(&ModelEvidence::cE, sd.cE, false);
        fold(&ModelEvidence::fO, sd.fO, true);
        fold(&ModelEvidence::cO, sd.cO, true);
        e.log_bf = bayes_factor_log(e);
        lbf[i] = e.log_bf;
    }
    if (prior_probs.empty()) prior_probs.assign(models.size(), 1.0 / double(models.size()));
    const std::vector<double> post = posterior_probs(lbf, prior_probs);
    for (std::size_t i = 0; i < models.size(); ++i) out.report.models[i].posterior_prob = post[i];
    return out;
}

} // namespace cbf
