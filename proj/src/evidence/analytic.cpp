#include <cmath>
#include <limits>
#include <numeric>

#include "cbf/error.hpp"
#include "cbf/evidence.hpp"
#include "internal.hpp"

namespace cbf {

std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::None: return "none";
    case Method::Analytic: return "analytic";
    case Method::MonteCarlo: return "monte-carlo";
    case Method::SamplingFallback: return "sampling-fallback";
    case Method::LargeSampleNormal: return "large-sample-normal";
    case Method::Complement: return "complement";
    }
    return "unknown";
}

void validate(const McConfig& cfg) {
    if (cfg.draws < 100) fail(Errc::InvalidConfig, "monte_carlo.draws must be at least 100");
    if (cfg.qmc_points < 2) fail(Errc::InvalidConfig, "monte_carlo.qmc_points must be at least 2");
    if (!(cfg.orthant.abs_tol > 0.0)) fail(Errc::InvalidConfig, "orthant accuracy must be positive");
    if (cfg.orthant.max_evaluations < 1000) fail(Errc::InvalidConfig, "orthant evaluation cap must be at least 1000");
    if (cfg.orthant.shifts < 2) fail(Errc::InvalidConfig, "orthant needs at least two random shifts");
}

EvidenceContext EvidenceContext::build(const SufficientStats& stats) {
    EvidenceContext ctx;
    ctx.stats = stats;
    ctx.posterior = posterior_params(stats);
    ctx.fractions = minimal_fractions(stats);
    ctx.fractional = fractional_stats(stats, ctx.fractions);
    const MatrixTParams prior = prior_params(stats, ctx.fractions, Matrix::Zero(stats.K(), stats.P));
    ctx.prior_row_scale = prior.row_scale;
    ctx.prior_dof = prior.dof;
    return ctx;
}

MatrixTParams EvidenceContext::prior(const Vector& theta0) const {
    return {theta0.reshaped(K(), P()), prior_row_scale, fractional.s, prior_dof};
}

bool is_single_column(const ConstrainedModel& m, int K, int P, int* column) {
    int found = -1;
    auto scan = [&](const Matrix& r) {
        for (Eigen::Index i = 0; i < r.rows(); ++i) {
            for (int p = 0; p < P; ++p) {
                if (r.row(i).segment(p * K, K).cwiseAbs().maxCoeff() == 0.0) continue;
                if (found >= 0 && found != p) return false;
                found = p;
            }
        }
        return true;
    };
    if (!scan(m.re) || !scan(m.ro)) return false;
    if (found < 0) return false;
    if (column) *column = found;
    return true;
}

namespace {

struct ColumnSide {
    Vector theta;   // column p of the location
    Matrix m;       // row scale
    double spp;     // column scale entry
    double dof;
};

std::optional<Quantity> analytic_equality(const ConstrainedModel& m, const Matrix& re, const ColumnSide& s) {
    if (re.rows() == 0) return std::nullopt;
    const MvtParams t{re * s.theta, (s.spp / s.dof) * symmetrize(re * s.m * re.transpose()), s.dof};
    return detail::from_log(mvt_logpdf(m.rhs_e, t));
}

std::optional<Quantity> analytic_order(const ConstrainedModel& m, const Matrix& re, const Matrix& ro,
                                       const ColumnSide& s, Rng& rng, const OrthantOptions& opts) {
    if (ro.rows() == 0) return std::nullopt;
    Vector mu = ro * s.theta;
    Matrix schur = ro * s.m * ro.transpose();
    double scale = s.spp / s.dof;
    double dof = s.dof;
    if (re.rows() > 0) {
        const Matrix a = symmetrize(re * s.m * re.transpose());
        const Matrix a_inv = spd_inverse(a, "R_E M R_E'");
        const Matrix cross = ro * s.m * re.transpose();
        const Vector resid = m.rhs_e - re * s.theta;
        const double q = resid.dot(a_inv * resid);
        mu += cross * a_inv * resid;
        schur -= cross * a_inv * cross.transpose();
        dof = s.dof + double(re.rows());
        scale = (s.spp + q) / dof;
    }
    const MvtParams t{mu, scale * symmetrize(schur), dof};
    const Vector upper = Vector::Constant(ro.rows(), std::numeric_limits<double>::infinity());
    const ProbabilityEstimate est = mvt_orthant(m.rhs_o, upper, t, rng, opts);
    Quantity q = detail::from_probability(est.value);
    q.cdf_error = est.error;
    return q;
}

} // namespace

AnalyticResult analytic_single_column(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                                      std::size_t model_index) {
    const int K = ctx.K(), P = ctx.P();
    int p = 0;
    if (!is_single_column(m, K, P, &p)) {
        fail(Errc::NotSingleColumn, "model '" + m.name + "' constrains more than one outcome column");
    }
    const Matrix re = m.re.middleCols(p * K, K);
    const Matrix ro = m.ro.middleCols(p * K, K);
    const Vector theta0 = boundary_point(m, ctx.PK());
    const ColumnSide post{ctx.posterior.location.col(p), ctx.posterior.row_scale, ctx.posterior.col_scale(p, p),
                          ctx.posterior.dof};
    const ColumnSide prior{theta0.segment(p * K, K), ctx.prior_row_scale, ctx.fractional.s(p, p), ctx.prior_dof};
    AnalyticResult r;
    r.fE = analytic_equality(m, re, post);
    r.cE = analytic_equality(m, re, prior);
    Rng rng_f(cfg.seed, streams::make(streams::kAnalytic, 2 * model_index));
    Rng rng_c(cfg.seed, streams::make(streams::kAnalytic, 2 * model_index + 1));
    r.fO = analytic_order(m, re, ro, post, rng_f, cfg.orthant);
    r.cO = analytic_order(m, re, ro, prior, rng_c, cfg.orthant);
    return r;
}

Quantity complement_of(const std::vector<Quantity>& members) {
    double total = 0.0, var = 0.0, err = 0.0;
    for (const auto& q : members) {
        total += q.value;
        var += q.mc_se * q.mc_se;
        err += q.cdf_error;
    }
    Quantity out = detail::from_probability(1.0 - total);
    out.mc_se = std::sqrt(var);
    out.cdf_error = err;
    return out;
}

double bayes_factor_log(const ModelEvidence& e) {
    double lb = 0.0;
    if (e.fE) lb += e.fE->log_value;
    if (e.cE) lb -= e.cE->log_value;
    if (e.fO) lb += e.fO->log_value;
    if (e.cO) lb -= e.cO->log_value;
    return lb;
}

std::vector<double> posterior_probs(const std::vector<double>& log_bfs, const std::vector<double>& prior_probs) {
    if (log_bfs.size() != prior_probs.size()) fail(Errc::InvalidConfig, "one prior probability per model is required");
    double total = 0.0;
    for (double p : prior_probs) {
        if (!(p >= 0.0)) fail(Errc::InvalidConfig, "prior model probabilities must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) fail(Errc::InvalidConfig, "prior model probabilities must sum to 1");
    std::vector<double> w(log_bfs.size(), -std::numeric_limits<double>::infinity());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (prior_probs[i] > 0.0) w[i] = log_bfs[i] + std::log(prior_probs[i]);
        mx = std::max(mx, w[i]);
    }
    double z = 0.0;
    for (double& x : w) {
        x = std::exp(x - mx);
        z += x;
    }
    for (double& x : w) x /= z;
    return w;
}

} // namespace cbf
