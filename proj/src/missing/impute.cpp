#include <algorithm>
#include <cmath>
#include <limits>

#include "cbf/error.hpp"
#include "cbf/missing.hpp"
#include "cbf/parallel.hpp"

namespace cbf {

namespace {

void draw_missing(DataBatch& cur, const Mask& observed, const Matrix& x, Rng& rng) {
    const SufficientStats st = sufficient_stats(cur);
    const MatrixTParams post = posterior_params(st);
    const Eigen::Index K = x.cols(), P = cur.y.cols();
    const Matrix sigma = InverseWishart(post.iw_dof(), post.col_scale).sample(rng);
    const Matrix ls = cholesky(sigma, "imputation covariance draw");
    const Matrix lm = cholesky(post.row_scale, "(X'X)^-1");
    Matrix z(K, P);
    for (Eigen::Index p = 0; p < P; ++p) {
        for (Eigen::Index k = 0; k < K; ++k) z(k, p) = rng.normal();
    }
    const Matrix theta = post.location + lm * z * ls.transpose();
    for (Eigen::Index i = 0; i < cur.y.rows(); ++i) {
        if (observed.row(i).all()) continue;
        Vector row = cur.y.row(i).transpose();
        for (Eigen::Index p = 0; p < P; ++p) {
            if (!observed(i, p)) row[p] = std::numeric_limits<double>::quiet_NaN();
        }
        draw_conditional_outcomes(row, (x.row(i) * theta).transpose(), sigma, rng);
        cur.y.row(i) = row.transpose();
    }
}

} // namespace

void draw_conditional_outcomes(Eigen::Ref<Vector> y, const Vector& mean, const Matrix& sigma, Rng& rng) {
    const Eigen::Index P = y.size();
    std::vector<int> fixed;
    Vector vals(P);
    Eigen::Index nf = 0;
    for (Eigen::Index p = 0; p < P; ++p) {
        if (std::isfinite(y[p])) {
            fixed.push_back(int(p));
            vals[nf++] = y[p];
        }
    }
    if (nf == P) return;
    const MvnParams c = conditional_normal(mean, sigma, fixed, vals.head(nf));
    const Matrix lc = cholesky(c.cov, "conditional outcome covariance");
    Vector e(c.mean.size());
    for (Eigen::Index k = 0; k < e.size(); ++k) e[k] = rng.normal();
    const Vector draw = c.mean + lc * e;
    Eigen::Index k = 0;
    for (Eigen::Index p = 0; p < P; ++p) {
        if (!std::isfinite(y[p])) y[p] = draw[k++];
    }
}

Mask observed_mask(const DataBatch& batch) { return batch.y.array().isFinite(); }

ImputedSet impute_outcomes(const DataBatch& batch, const ImputeOptions& opts, std::uint64_t seed) {
    if (opts.imputations < 1) fail(Errc::InvalidConfig, "at least one imputation is required");
    if (opts.burn_in < 0) fail(Errc::InvalidConfig, "burn-in must be non-negative");
    if (batch.w.size() > 0 && !batch.w.array().isFinite().all()) {
        fail(Errc::MissingInCovariates, "covariates contain missing values; supply externally imputed data sets");
    }
    ImputedSet set;
    set.observed = observed_mask(batch);
    const int K = batch.groups + int(batch.w.cols());
    const int P = int(batch.y.cols());
    for (int p = 0; p < P; ++p) {
        const auto n_obs = set.observed.col(p).count();
        if (n_obs < K + P) {
            fail(Errc::TooFewCompleteCases, "outcome column " + std::to_string(p + 1) + " has " + std::to_string(n_obs) +
                                                " observed values; at least K + P = " + std::to_string(K + P) + " needed");
        }
    }
    if (set.observed.all()) {
        set.imputations.assign(std::size_t(opts.imputations), batch);
        return set;
    }

    // start from column means of the observed values
    DataBatch start = batch;
    for (int p = 0; p < P; ++p) {
        double sum = 0.0;
        Eigen::Index n = 0;
        for (Eigen::Index i = 0; i < batch.y.rows(); ++i) {
            if (set.observed(i, p)) {
                sum += batch.y(i, p);
                ++n;
            }
        }
        for (Eigen::Index i = 0; i < batch.y.rows(); ++i) {
            if (!set.observed(i, p)) start.y(i, p) = sum / double(n);
        }
    }
    const Matrix x = build_design(start).first;

    set.imputations.resize(std::size_t(opts.imputations));
    parallel_blocks(std::size_t(opts.imputations), 1, opts.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t m = begin; m < end; ++m) {
            Rng rng(seed, streams::make(streams::kImputation, m));
            DataBatch cur = start;
            for (int sweep = 0; sweep < opts.burn_in + 1; ++sweep) draw_missing(cur, set.observed, x, rng);
            set.imputations[m] = std::move(cur);
        }
    });
    return set;
}

void check_imputations(const DataBatch& original, const ImputedSet& set) {
    if (set.imputations.empty()) fail(Errc::MaskMismatch, "no imputed data sets supplied");
    const Mask mask = observed_mask(original);
    if (set.observed.rows() != mask.rows() || set.observed.cols() != mask.cols() || (set.observed != mask).any()) {
        fail(Errc::MaskMismatch, "mask does not match the missing entries of the data");
    }
    for (std::size_t m = 0; m < set.imputations.size(); ++m) {
        const DataBatch& b = set.imputations[m];
        const std::string which = "imputation " + std::to_string(m + 1);
        if (b.y.rows() != original.y.rows() || b.y.cols() != original.y.cols() || b.w.cols() != original.w.cols() ||
            b.group != original.group) {
            fail(Errc::MaskMismatch, which + " does not have the shape of the original data");
        }
        if (!b.y.allFinite()) fail(Errc::MaskMismatch, which + " still contains missing values");
        for (Eigen::Index i = 0; i < b.y.rows(); ++i) {
            for (Eigen::Index p = 0; p < b.y.cols(); ++p) {
                if (mask(i, p) && b.y(i, p) != original.y(i, p)) fail(Errc::MaskMismatch, which + " alters observed entries");
            }
        }
    }
}

} // namespace cbf
