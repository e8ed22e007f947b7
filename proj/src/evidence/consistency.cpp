#include <algorithm>
#include <cmath>
#include <numeric>

#include "cbf/consistency.hpp"
#include "cbf/error.hpp"
#include "cbf/parallel.hpp"

namespace cbf {

void validate(const TruthSpec& truth) {
    const auto J = Eigen::Index(truth.proportions.size());
    const Eigen::Index K = J + truth.covariates;
    if (J < 1 || truth.covariates < 0) fail(Errc::InvalidConfig, "truth needs at least one group");
    if (truth.theta.rows() != K) fail(Errc::InvalidConfig, "truth theta must have J + L rows");
    if (truth.sigma.rows() != truth.theta.cols() || truth.sigma.cols() != truth.theta.cols()) {
        fail(Errc::InvalidConfig, "truth sigma must be P x P");
    }
    double total = 0.0;
    for (double p : truth.proportions) {
        if (!(p > 0.0)) fail(Errc::InvalidConfig, "group proportions must be positive");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(Errc::InvalidConfig, "group proportions must sum to 1");
    Matrix l;
    if (!try_cholesky(truth.sigma, l)) fail(Errc::InvalidConfig, "truth sigma must be positive definite");
}

std::vector<int> allocate_groups(const std::vector<double>& proportions, int n) {
    const std::size_t J = proportions.size();
    if (n < int(J)) fail(Errc::InvalidConfig, "sample size smaller than the number of groups");
    std::vector<int> size(J, 1);
    const int rest = n - int(J);
    std::vector<double> frac(J);
    int used = 0;
    for (std::size_t j = 0; j < J; ++j) {
        const double want = proportions[j] * rest;
        size[j] += int(std::floor(want));
        used += int(std::floor(want));
        frac[j] = want - std::floor(want);
    }
    std::vector<std::size_t> order(J);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (int k = 0; k < rest - used; ++k) ++size[order[std::size_t(k) % J]];
    return size;
}

DataBatch simulate_batch(const TruthSpec& truth, int n, std::uint64_t seed, std::size_t replication) {
    const std::vector<int> sizes = allocate_groups(truth.proportions, n);
    const int J = int(sizes.size()), L = truth.covariates;
    const Eigen::Index P = truth.theta.cols();
    Rng rng(seed, streams::make(streams::kSimulation, replication), std::uint32_t(n));
    const Matrix chol = cholesky(truth.sigma, "truth sigma");
    DataBatch b;
    b.groups = J;
    b.y.resize(n, P);
    b.w.resize(n, L);
    Eigen::Index row = 0;
    for (int j = 0; j < J; ++j) {
        for (int i = 0; i < sizes[std::size_t(j)]; ++i, ++row) {
            b.group.push_back(j);
            Vector mean = truth.theta.row(j).transpose();
            for (int l = 0; l < L; ++l) {
                b.w(row, l) = rng.normal();
                mean += b.w(row, l) * truth.theta.row(J + l).transpose();
            }
            Vector z(P);
            for (Eigen::Index p = 0; p < P; ++p) z[p] = rng.normal();
            b.y.row(row) = (mean + chol * z).transpose();
        }
    }
    return b;
}

std::vector<ConsistencyRow> consistency_sim(const std::vector<ConstrainedModel>& models, const TruthSpec& truth,
                                            const ConsistencyOptions& opts, const McConfig& cfg) {
    validate(truth);
    if (opts.n_grid.empty() || opts.replications < 1) fail(Errc::InvalidConfig, "empty simulation grid");
    auto find = [&](const std::string& name) -> std::ptrdiff_t {
        if (name.empty()) return -1;
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (models[i].name == name) return std::ptrdiff_t(i);
        }
        fail(Errc::InvalidConfig, "simulation names unknown model '" + name + "'");
    };
    const std::ptrdiff_t target = find(opts.target);
    if (target < 0) fail(Errc::InvalidConfig, "simulation needs a target model");
    const std::ptrdiff_t competitor = find(opts.competitor);

    std::vector<ConsistencyRow> rows;
    for (int n : opts.n_grid) {
        ConsistencyRow row;
        row.n = n;
        row.log_bf.resize(std::size_t(opts.replications));
        std::vector<double> fo(std::size_t(opts.replications), 0.0);
        for (int r = 0; r < opts.replications; ++r) {
            const DataBatch batch = simulate_batch(truth, n, cfg.seed, std::size_t(r));
            const EvidenceReport rep = evaluate(models, sufficient_stats(batch), cfg);
            const ModelEvidence& t = rep.models[std::size_t(target)];
            const double base = competitor < 0 ? 0.0 : rep.models[std::size_t(competitor)].log_bf;
            row.log_bf[std::size_t(r)] = t.log_bf - base;
            fo[std::size_t(r)] = t.fO ? t.fO->value : 0.0;
        }
        CompensatedSum s, f;
        for (std::size_t r = 0; r < row.log_bf.size(); ++r) {
            s.add(row.log_bf[r]);
            f.add(fo[r]);
        }
        const double reps = double(opts.replications);
        row.mean_log_bf = s.value() / reps;
        row.mean_target_fO = f.value() / reps;
        CompensatedSum ss;
        for (double v : row.log_bf) ss.add((v - row.mean_log_bf) * (v - row.mean_log_bf));
        row.sd_log_bf = opts.replications > 1 ? std::sqrt(ss.value() / (reps - 1.0)) : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace cbf
