#pragma once

#include <string>
#include <vector>

#include "cbf/evidence.hpp"

namespace cbf {

/// Data-generating truth: Y = X Theta + E with rows of E ~ N(0, sigma).
/// Covariates, when L > 0, are drawn iid standard normal.
struct TruthSpec {
    Matrix theta;                      // K x P
    Matrix sigma;                      // P x P
    std::vector<double> proportions;   // per group, summing to 1
    int covariates = 0;                // L
};

struct ConsistencyRow {
    int n = 0;
    double mean_log_bf = 0.0;
    double sd_log_bf = 0.0;
    double mean_target_fO = 0.0;
    /// Per replication, in replication order.
    std::vector<double> log_bf;
};

struct ConsistencyOptions {
    std::vector<int> n_grid{50, 200, 800};
    int replications = 20;
    /// Bayes factor of `target` against `competitor`; an empty competitor
    /// means the unconstrained model.
    std::string target;
    std::string competitor;
};

void validate(const TruthSpec& truth);

/// Group sizes for total n: largest-remainder rounding of the proportions,
/// with at least one observation per group.
std::vector<int> allocate_groups(const std::vector<double>& proportions, int n);

/// One simulated dataset; deterministic in (seed, replication, n).
DataBatch simulate_batch(const TruthSpec& truth, int n, std::uint64_t seed, std::size_t replication);

std::vector<ConsistencyRow> consistency_sim(const std::vector<ConstrainedModel>& models, const TruthSpec& truth,
                                            const ConsistencyOptions& opts, const McConfig& cfg);

} // namespace cbf
