#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbf/constraints.hpp"
#include "cbf/model.hpp"
#include "cbf/orthant.hpp"

namespace cbf {

enum class Method { None, Analytic, MonteCarlo, SamplingFallback, LargeSampleNormal, Complement };
enum class MethodChoice { Auto, Analytic, MonteCarlo };

std::string_view to_string(Method m) noexcept;

struct McConfig {
    std::size_t draws = 100'000;
    std::uint64_t seed = 20240607;
    /// Worker threads; 0 means one per hardware thread.
    int threads = 1;
    bool large_sample_normal = false;
    MethodChoice method = MethodChoice::Auto;
    /// Lattice points per draw for orthants of dimension >= 3.
    std::size_t qmc_points = 256;
    OrthantOptions orthant{};
    /// Prior draws used to check that complement members do not overlap.
    std::size_t overlap_draws = 10'000;
};

/// Validates the configuration (InvalidConfig).
void validate(const McConfig& cfg);

struct Quantity {
    double value = 0.0;
    double log_value = 0.0;
    /// Monte Carlo standard error (zero for closed forms).
    double mc_se = 0.0;
    /// Bound on the numerical integration error of the orthant routine.
    double cdf_error = 0.0;
    /// Set when the value was raised to the 1e-12 floor before taking logs.
    bool clipped = false;
};

struct ModelEvidence {
    std::string name;
    std::string hypothesis;
    Method method = Method::None;
    std::optional<Quantity> fE, cE, fO, cO;
    double log_bf = 0.0;
    double prior_prob = 0.0;
    double posterior_prob = 0.0;
    std::vector<std::string> warnings;
};

struct EvidenceReport {
    int N = 0, J = 0, L = 0, P = 0;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    bool large_sample_normal = false;
    std::vector<ModelEvidence> models;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// Everything the estimators need from the data, computed once per analysis.
struct EvidenceContext {
    SufficientStats stats;
    MatrixTParams posterior;         // location Theta-hat
    FractionVector fractions;
    FractionalStats fractional;
    Matrix prior_row_scale;          // (X_b'X_b)^{-1}
    double prior_dof = 1.0;

    static EvidenceContext build(const SufficientStats& stats);
    int K() const { return stats.K(); }
    int P() const { return stats.P; }
    int PK() const { return stats.K() * stats.P; }
    MatrixTParams prior(const Vector& theta0) const;
};

// Individual estimators; each uses the same draw streams as evaluate(), so
// they reproduce its numbers for a model placed at index `model_index`.
Quantity fit_equality(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                      std::size_t model_index = 0);
Quantity complexity_equality(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                             std::size_t model_index = 0);
Quantity fit_order(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                   std::size_t model_index = 0);
Quantity complexity_order(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                          std::size_t model_index = 0);

struct AnalyticResult {
    std::optional<Quantity> fE, cE, fO, cO;
};

/// True when every constraint row involves a single column of Theta, the
/// same one for all rows.
bool is_single_column(const ConstrainedModel& m, int K, int P, int* column = nullptr);

/// Closed forms through the column marginals (Student t / Cauchy). Throws
/// NotSingleColumn otherwise.
AnalyticResult analytic_single_column(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                                      std::size_t model_index = 0);

/// 1 - sum of member values, floored at kProbabilityFloor.
Quantity complement_of(const std::vector<Quantity>& members);

double bayes_factor_log(const ModelEvidence& e);

/// Normalizes prior-weighted Bayes factors in log space.
std::vector<double> posterior_probs(const std::vector<double>& log_bfs, const std::vector<double>& prior_probs);

/// Full analysis of a model set. Posterior covariance draws are shared by all
/// models; results do not depend on the thread count.
EvidenceReport evaluate(const std::vector<ConstrainedModel>& models, const SufficientStats& stats,
                        const McConfig& cfg, std::vector<double> prior_probs = {});

} // namespace cbf
