#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cbf/evidence.hpp"

namespace cbf {

using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Completed datasets sharing the observed entries of the original data.
struct ImputedSet {
    std::vector<DataBatch> imputations;
    Mask observed;  // N x P, true where y was observed
};

struct ImputeOptions {
    int imputations = 50;
    int burn_in = 100;
    int threads = 1;
};

/// Observed-entry mask of y; missing entries are NaN.
Mask observed_mask(const DataBatch& batch);

/// Data-augmentation Gibbs sampler under the unconstrained model. Each
/// imputation runs its own chain on stream (seed, imputation index) and keeps
/// the state after `burn_in` sweeps. Missing entries must be NaN in y;
/// covariates must be complete (MissingInCovariates) and every outcome column
/// needs at least K + P observed rows (TooFewCompleteCases).
ImputedSet impute_outcomes(const DataBatch& batch, const ImputeOptions& opts, std::uint64_t seed);

/// Fills the NaN entries of one outcome row with a draw from their normal
/// conditional given the observed entries, for row mean `mean` and
/// covariance `sigma`.
void draw_conditional_outcomes(Eigen::Ref<Vector> y, const Vector& mean, const Matrix& sigma, Rng& rng);

/// Checks externally supplied imputations against the original data:
/// matching shapes, complete values and untouched observed entries
/// (MaskMismatch).
void check_imputations(const DataBatch& original, const ImputedSet& set);

struct QuantitySpread {
    std::optional<double> fE, cE, fO, cO;
};

struct AveragedReport {
    EvidenceReport report;
    /// Between-imputation standard deviation of each averaged quantity.
    std::vector<QuantitySpread> between_sd;
    int imputations = 0;
};

/// Runs the full pipeline on every imputation (own fractional prior each)
/// and averages fE, cE, fO and cO arithmetically before forming Bayes
/// factors.
AveragedReport average_evidence(const std::vector<ConstrainedModel>& models, const ImputedSet& set,
                                const McConfig& cfg, std::vector<double> prior_probs = {});

} // namespace cbf
