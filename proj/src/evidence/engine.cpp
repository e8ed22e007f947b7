#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "cbf/error.hpp"
#include "cbf/evidence.hpp"
#include "cbf/parallel.hpp"
#include "internal.hpp"

namespace cbf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBlock = 512;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// sum_pq sigma_pq A_p M B_q' for column blocks A_p, B_q of width K, i.e.
/// A (Sigma (x) M) B' without forming the Kronecker product.
class KronBlocks {
public:
    KronBlocks() = default;
    KronBlocks(const Matrix& a, const Matrix& b, const Matrix& m, int K, int P) : P_(P), rows_(a.rows()), cols_(b.rows()) {
        for (int p = 0; p < P; ++p) {
            for (int q = 0; q < P; ++q) {
                Matrix g = a.middleCols(p * K, K) * m * b.middleCols(q * K, K).transpose();
                const bool used = g.size() > 0 && g.cwiseAbs().maxCoeff() > 0.0;
                blocks_.push_back({p, q, std::move(g)});
                if (!used) blocks_.pop_back();
            }
        }
    }

    Matrix operator()(const Matrix& sigma) const {
        Matrix out = Matrix::Zero(rows_, cols_);
        for (const auto& b : blocks_) out += sigma(b.p, b.q) * b.g;
        return out;
    }

private:
    struct Block {
        int p, q;
        Matrix g;
    };
    int P_ = 0;
    Eigen::Index rows_ = 0, cols_ = 0;
    std::vector<Block> blocks_;
};

enum class Route { Skip, Analytic, Mc, Fallback, Normal };

struct SideGeometry {
    Vector mean_e, mean_o;
    KronBlocks ee, oe, oo;
    // sampling fallback: zeta = H theta
    Vector zeta_mean;
    KronBlocks zz;
};

struct Plan {
    const ConstrainedModel* model = nullptr;
    std::size_t index = 0;
    Route e_post = Route::Skip, e_prior = Route::Skip, o_post = Route::Skip, o_prior = Route::Skip;
    TransformedModel tr;
    RowMajor ro_tilde;
    Vector theta0;
    SideGeometry post, prior;
    std::vector<double> fe, ce, fo, co;  // per draw
    // log equality densities that weight the order series of mixed models
    std::vector<double> wf, wc;
};

bool weighs_post(const Plan& p) {
    return p.model->equalities() > 0 && (p.o_post == Route::Mc || p.o_post == Route::Fallback);
}
bool weighs_prior(const Plan& p) {
    return p.model->equalities() > 0 && (p.o_prior == Route::Mc || p.o_prior == Route::Fallback);
}

SideGeometry make_side(const Plan& plan, const Vector& location, const Matrix& row_scale, int K, int P, bool fallback) {
    const ConstrainedModel& m = *plan.model;
    SideGeometry g;
    g.mean_e = m.re * location;
    g.mean_o = m.ro * location;
    if (m.equalities() > 0) g.ee = KronBlocks(m.re, m.re, row_scale, K, P);
    if (m.orders() > 0 && !fallback) {
        g.oo = KronBlocks(m.ro, m.ro, row_scale, K, P);
        if (m.equalities() > 0) g.oe = KronBlocks(m.ro, m.re, row_scale, K, P);
    }
    if (fallback) {
        g.zeta_mean = plan.tr.h * location;
        g.zz = KronBlocks(plan.tr.h, plan.tr.h, row_scale, K, P);
    }
    return g;
}

/// Log density of the equality part at r_E.
double equality_logpdf(const Plan& plan, const SideGeometry& g, const Matrix& sigma) {
    const Matrix cov = symmetrize(g.ee(sigma));
    Matrix l;
    if (!try_cholesky(cov, l)) fail(Errc::NotPositiveDefinite, "covariance of R_E theta is not positive definite");
    return mvn_logpdf_cholesky(plan.model->rhs_e, g.mean_e, l);
}

/// Conditional normal of R_O theta given R_E theta = r_E.
MvnParams order_conditional(const Plan& plan, const SideGeometry& g, const Matrix& sigma) {
    const ConstrainedModel& m = *plan.model;
    Matrix oo = symmetrize(g.oo(sigma));
    if (m.equalities() == 0) return {g.mean_o, oo};
    const Matrix ee = symmetrize(g.ee(sigma));
    const Matrix oe = g.oe(sigma);
    Eigen::LLT<Matrix> llt(ee);
    if (llt.info() != Eigen::Success) fail(Errc::SingularConditioningBlock, "R_E covariance is singular");
    const Matrix gain = llt.solve(oe.transpose()).transpose();
    return {g.mean_o + gain * (m.rhs_e - g.mean_e), symmetrize(oo - gain * oe.transpose())};
}

/// One draw of zeta_O given zeta_E = r_E, written to column `col` of a
/// structure-of-arrays buffer with `stride` points per coordinate.
void sample_free_block(const Plan& plan, const SideGeometry& g, const Matrix& sigma, Rng& rng, double* buf,
                       std::size_t stride, std::size_t col) {
    const ConstrainedModel& m = *plan.model;
    const Eigen::Index re = m.equalities();
    const Matrix cov = symmetrize(g.zz(sigma));
    const Eigen::Index free = cov.rows() - re;
    Vector mean = g.zeta_mean.tail(free);
    Matrix cond = cov.bottomRightCorner(free, free);
    if (re > 0) {
        Eigen::LLT<Matrix> llt(cov.topLeftCorner(re, re));
        if (llt.info() != Eigen::Success) fail(Errc::SingularConditioningBlock, "R_E covariance is singular");
        const Matrix cross = cov.bottomLeftCorner(free, re);
        const Matrix gain = llt.solve(cross.transpose()).transpose();
        mean += gain * (m.rhs_e - g.zeta_mean.head(re));
        cond = symmetrize(cond - gain * cross.transpose());
    }
    const Matrix l = cholesky(cond, "conditional covariance of the free coordinates");
    Vector z(free);
    for (Eigen::Index i = 0; i < free; ++i) z[i] = rng.normal();
    const Vector x = mean + l * z;
    for (Eigen::Index k = 0; k < free; ++k) buf[std::size_t(k) * stride + col] = x[k];
}

struct DrawSetup {
    bool post_needed = false;
    bool prior_needed = false;
    std::optional<InverseWishart> post_iw, prior_iw;
    Matrix post_fixed;  // large-sample posterior covariance
    bool post_is_fixed = false;
};

void run_draws(std::vector<Plan>& plans, const EvidenceContext& ctx, const McConfig& cfg) {
    DrawSetup setup;
    for (const auto& p : plans) {
        setup.post_needed |= p.e_post == Route::Mc || p.o_post == Route::Mc || p.o_post == Route::Fallback;
        setup.prior_needed |= p.e_prior == Route::Mc || p.o_prior == Route::Mc || p.o_prior == Route::Fallback;
    }
    if (!setup.post_needed && !setup.prior_needed) return;
    const std::size_t S = cfg.draws;
    for (auto& p : plans) {
        if (p.e_post == Route::Mc) p.fe.assign(S, 0.0);
        if (p.e_prior == Route::Mc) p.ce.assign(S, 0.0);
        if (p.o_post == Route::Mc || p.o_post == Route::Fallback) p.fo.assign(S, 0.0);
        if (p.o_prior == Route::Mc || p.o_prior == Route::Fallback) p.co.assign(S, 0.0);
        if (weighs_post(p)) p.wf.assign(S, 0.0);
        if (weighs_prior(p)) p.wc.assign(S, 0.0);
    }
    if (cfg.large_sample_normal) {
        setup.post_is_fixed = true;
        setup.post_fixed = ctx.posterior.col_scale / ctx.posterior.dof;
    } else {
        setup.post_iw.emplace(ctx.posterior.iw_dof(), ctx.posterior.col_scale);
    }
    setup.prior_iw.emplace(ctx.prior_dof + ctx.P() - 1.0, ctx.fractional.s);

    parallel_blocks(S, kBlock, cfg.threads, [&](std::size_t begin, std::size_t end) {
        const std::size_t count = end - begin;
        std::vector<std::vector<double>> post_buf(plans.size()), prior_buf(plans.size());
        for (std::size_t i = 0; i < plans.size(); ++i) {
            const auto free = std::size_t(plans[i].ro_tilde.cols());
            if (plans[i].o_post == Route::Fallback) post_buf[i].assign(free * count, 0.0);
            if (plans[i].o_prior == Route::Fallback) prior_buf[i].assign(free * count, 0.0);
        }
        Matrix sigma, sigma_b;
        for (std::size_t s = begin; s < end; ++s) {
            const auto sub = std::uint32_t(s);
            if (setup.post_needed) {
                if (setup.post_is_fixed) {
                    sigma = setup.post_fixed;
                } else {
                    Rng r(cfg.seed, streams::kPosteriorSigma, sub);
                    sigma = setup.post_iw->sample(r);
                }
            }
            if (setup.prior_needed) {
                Rng r(cfg.seed, streams::kPriorSigma, sub);
                sigma_b = setup.prior_iw->sample(r);
            }
            for (std::size_t i = 0; i < plans.size(); ++i) {
                Plan& p = plans[i];
                const Vector upper = Vector::Constant(p.model->orders(), kInf);
                if (p.e_post == Route::Mc || !p.wf.empty()) {
                    const double l = equality_logpdf(p, p.post, sigma);
                    if (p.e_post == Route::Mc) p.fe[s] = l;
                    if (!p.wf.empty()) p.wf[s] = l;
                }
                if (p.e_prior == Route::Mc || !p.wc.empty()) {
                    const double l = equality_logpdf(p, p.prior, sigma_b);
                    if (p.e_prior == Route::Mc) p.ce[s] = l;
                    if (!p.wc.empty()) p.wc[s] = l;
                }
                if (p.o_post == Route::Mc) {
                    const MvnParams c = order_conditional(p, p.post, sigma);
                    Rng r(cfg.seed, streams::make(streams::kOrthantPosterior, p.index), sub);
                    p.fo[s] = mvn_rectangle_fast(p.model->rhs_o, upper, c.mean, c.cov, cfg.qmc_points, r);
                } else if (p.o_post == Route::Fallback) {
                    Rng r(cfg.seed, streams::make(streams::kFallbackPosterior, p.index), sub);
                    sample_free_block(p, p.post, sigma, r, post_buf[i].data(), count, s - begin);
                }
                if (p.o_prior == Route::Mc) {
                    const MvnParams c = order_conditional(p, p.prior, sigma_b);
                    Rng r(cfg.seed, streams::make(streams::kOrthantPrior, p.index), sub);
                    p.co[s] = mvn_rectangle_fast(p.model->rhs_o, upper, c.mean, c.cov, cfg.qmc_points, r);
                } else if (p.o_prior == Route::Fallback) {
                    Rng r(cfg.seed, streams::make(streams::kFallbackPrior, p.index), sub);
                    sample_free_block(p, p.prior, sigma_b, r, prior_buf[i].data(), count, s - begin);
                }
            }
        }
        const auto& kern = simd::kernels();
        std::vector<unsigned char> hit(count);
        for (std::size_t i = 0; i < plans.size(); ++i) {
            Plan& p = plans[i];
            const int rows = int(p.ro_tilde.rows()), cols = int(p.ro_tilde.cols());
            auto flush = [&](const std::vector<double>& buf, std::vector<double>& out) {
                kern.count_satisfied(p.ro_tilde.data(), rows, cols, p.tr.rhs_o_tilde.data(), buf.data(), count, hit.data());
                for (std::size_t k = 0; k < count; ++k) out[begin + k] = hit[k];
            };
            if (p.o_post == Route::Fallback) flush(post_buf[i], p.fo);
            if (p.o_prior == Route::Fallback) flush(prior_buf[i], p.co);
        }
    });
}

/// With equalities, draws of Sigma are weighted by the equality density so the
/// order probability is conditional on R_E theta = r_E.
Quantity reduce_order(const std::vector<double>& series, const std::vector<double>& log_weights, Route route) {
    if (!log_weights.empty()) return detail::reduce_weighted(series, log_weights);
    return route == Route::Fallback ? detail::reduce_hits(series) : detail::reduce_mean(series);
}

Plan make_plan(const ConstrainedModel& m, std::size_t index, const EvidenceContext& ctx, const McConfig& cfg,
               bool force_mc = false) {
    Plan p;
    p.model = &m;
    p.index = index;
    const int K = ctx.K(), P = ctx.P(), PK = ctx.PK();
    p.theta0 = boundary_point(m, PK);
    p.tr = derive_transform(m, PK);
    p.ro_tilde = p.tr.ro_tilde;
    const bool has_e = m.equalities() > 0, has_o = m.orders() > 0;
    const bool single = is_single_column(m, K, P);
    if (cfg.method == MethodChoice::Analytic && !single) {
        fail(Errc::NotSingleColumn, "model '" + m.name + "' constrains several outcome columns; analytic method unavailable");
    }
    const bool analytic = single && cfg.method != MethodChoice::MonteCarlo && !force_mc;
    const bool fallback = has_o && !p.tr.rtilde_full_rank;
    const bool normal = cfg.large_sample_normal;
    if (has_e) {
        p.e_post = normal ? Route::Normal : analytic ? Route::Analytic : Route::Mc;
        p.e_prior = analytic ? Route::Analytic : Route::Mc;
    }
    if (has_o) {
        p.o_post = fallback ? Route::Fallback : normal ? Route::Normal : analytic ? Route::Analytic : Route::Mc;
        p.o_prior = fallback ? Route::Fallback : analytic ? Route::Analytic : Route::Mc;
    }
    p.post = make_side(p, ctx.posterior.location.reshaped(), ctx.posterior.row_scale, K, P, fallback);
    p.prior = make_side(p, p.theta0, ctx.prior_row_scale, K, P, fallback);
    return p;
}

Method method_of(const Plan& p) {
    if (p.o_post == Route::Fallback) return Method::SamplingFallback;
    const Route r = p.e_post != Route::Skip ? p.e_post : p.o_post;
    switch (r) {
    case Route::Analytic: return Method::Analytic;
    case Route::Mc: return Method::MonteCarlo;
    case Route::Normal: return Method::LargeSampleNormal;
    default: return Method::None;
    }
}

/// Single evaluation at Sigma-hat for the large-sample mode.
void fill_normal(const Plan& p, const EvidenceContext& ctx, const McConfig& cfg, ModelEvidence& out) {
    const Matrix sigma = ctx.posterior.col_scale / ctx.posterior.dof;
    if (p.e_post == Route::Normal) out.fE = detail::from_log(equality_logpdf(p, p.post, sigma));
    if (p.o_post == Route::Normal) {
        const MvnParams c = order_conditional(p, p.post, sigma);
        Rng r(cfg.seed, streams::make(streams::kOrthantPosterior, p.index), 0xFFFFFFFFu);
        const Vector upper = Vector::Constant(p.model->orders(), kInf);
        const ProbabilityEstimate est = mvn_orthant(p.model->rhs_o, upper, c, r, cfg.orthant);
        Quantity q = detail::from_probability(est.value);
        q.cdf_error = est.error;
        out.fO = q;
    }
}

void collect(const Plan& p, const EvidenceContext& ctx, const McConfig& cfg, ModelEvidence& out) {
    const bool any_analytic = p.e_post == Route::Analytic || p.e_prior == Route::Analytic ||
                              p.o_post == Route::Analytic || p.o_prior == Route::Analytic;
    if (any_analytic) {
        const AnalyticResult a = analytic_single_column(*p.model, ctx, cfg, p.index);
        if (p.e_post == Route::Analytic) out.fE = a.fE;
        if (p.e_prior == Route::Analytic) out.cE = a.cE;
        if (p.o_post == Route::Analytic) out.fO = a.fO;
        if (p.o_prior == Route::Analytic) out.cO = a.cO;
    }
    fill_normal(p, ctx, cfg, out);
    if (p.e_post == Route::Mc) out.fE = detail::reduce_log_mean(p.fe);
    if (p.e_prior == Route::Mc) out.cE = detail::reduce_log_mean(p.ce);
    if (p.o_post == Route::Mc || p.o_post == Route::Fallback) out.fO = reduce_order(p.fo, p.wf, p.o_post);
    if (p.o_prior == Route::Mc || p.o_prior == Route::Fallback) out.cO = reduce_order(p.co, p.wc, p.o_prior);
    const double few = 50.0 / double(cfg.draws);
    if (p.o_post == Route::Fallback && out.fO && out.fO->value < few) {
        out.warnings.push_back("fO rests on fewer than 50 accepted draws; increase draws");
    }
    if (p.o_prior == Route::Fallback && out.cO && out.cO->value < few) {
        out.warnings.push_back("cO rests on fewer than 50 accepted draws; increase draws");
    }
}

void note_clipping(ModelEvidence& e) {
    if (e.fO && e.fO->clipped) e.warnings.push_back("fO below 1e-12 was floored before taking logs");
    if (e.cO && e.cO->clipped) e.warnings.push_back("cO below 1e-12 was floored before taking logs");
}

Quantity single_quantity(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                         std::size_t index, int which) {
    validate(cfg);
    Plan p = make_plan(m, index, ctx, cfg, false);
    if (which == 0 && p.e_post == Route::Skip) fail(Errc::InvalidConfig, "model has no equality constraints");
    if (which == 1 && p.e_prior == Route::Skip) fail(Errc::InvalidConfig, "model has no equality constraints");
    if (which == 2 && p.o_post == Route::Skip) fail(Errc::InvalidConfig, "model has no order constraints");
    if (which == 3 && p.o_prior == Route::Skip) fail(Errc::InvalidConfig, "model has no order constraints");
    // only the requested quantity is computed
    if (which != 0) p.e_post = Route::Skip;
    if (which != 1) p.e_prior = Route::Skip;
    if (which != 2) p.o_post = Route::Skip;
    if (which != 3) p.o_prior = Route::Skip;
    std::vector<Plan> plans{std::move(p)};
    run_draws(plans, ctx, cfg);
    ModelEvidence e;
    collect(plans[0], ctx, cfg, e);
    switch (which) {
    case 0: return *e.fE;
    case 1: return *e.cE;
    case 2: return *e.fO;
    default: return *e.cO;
    }
}

/// Rejects complements whose member order regions overlap with non-negligible
/// prior probability: draws from the mixture of member priors and counts
/// points that satisfy two or more members.
void check_overlap(const std::vector<const Plan*>& members, const EvidenceContext& ctx, const McConfig& cfg,
                   std::size_t complement_index, const std::string& name) {
    if (members.size() < 2 || cfg.overlap_draws == 0) return;
    const int K = ctx.K(), P = ctx.P();
    const InverseWishart iw(ctx.prior_dof + P - 1.0, ctx.fractional.s);
    const Matrix lm = cholesky(ctx.prior_row_scale, "X_b'X_b inverse");
    std::size_t joint = 0;
    const std::size_t n = cfg.overlap_draws;
    for (std::size_t i = 0; i < n; ++i) {
        Rng r(cfg.seed, streams::make(streams::kOverlap, complement_index), std::uint32_t(i));
        const Plan& src = *members[i % members.size()];
        const Matrix ls = cholesky(iw.sample(r), "prior covariance draw");
        Matrix z(K, P);
        for (Eigen::Index c = 0; c < P; ++c) {
            for (Eigen::Index k = 0; k < K; ++k) z(k, c) = r.normal();
        }
        const Matrix theta = src.theta0.reshaped(K, P) + lm * z * ls.transpose();
        const Vector t = theta.reshaped();
        int inside = 0;
        for (const Plan* m : members) {
            if (((m->model->ro * t - m->model->rhs_o).array() > 0.0).all()) ++inside;
        }
        if (inside >= 2) ++joint;
    }
    const double ph = double(joint) / double(n);
    const double se = std::sqrt(ph * (1.0 - ph) / double(n));
    if (joint > 0 && ph > 3.0 * se) {
        fail(Errc::OverlappingRegions, "members of complement '" + name + "' overlap (estimated prior mass " +
                                           std::to_string(ph) + ")");
    }
}

/// Complement from per-draw member series when every member has one, which
/// keeps the common-random-number correlation in the standard error.
Quantity complement_quantity(const std::vector<const Plan*>& members, const std::vector<Quantity>& values,
                             bool posterior) {
    bool series = true;
    for (const Plan* m : members) {
        const auto& v = posterior ? m->fo : m->co;
        if (v.empty()) series = false;
    }
    if (!series) return complement_of(values);
    const std::size_t S = (posterior ? members[0]->fo : members[0]->co).size();
    std::vector<double> c(S, 1.0);
    for (const Plan* m : members) {
        const auto& v = posterior ? m->fo : m->co;
        for (std::size_t s = 0; s < S; ++s) c[s] -= v[s];
    }
    Quantity q = detail::reduce_mean(c);
    double err = 0.0;
    for (const auto& v : values) err += v.cdf_error;
    q.cdf_error = err;
    return q;
}

} // namespace

Quantity fit_equality(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg, std::size_t model_index) {
    return single_quantity(m, ctx, cfg, model_index, 0);
}

Quantity complexity_equality(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                             std::size_t model_index) {
    McConfig c = cfg;
    c.large_sample_normal = false;
    return single_quantity(m, ctx, c, model_index, 1);
}

Quantity fit_order(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg, std::size_t model_index) {
    return single_quantity(m, ctx, cfg, model_index, 2);
}

Quantity complexity_order(const ConstrainedModel& m, const EvidenceContext& ctx, const McConfig& cfg,
                          std::size_t model_index) {
    McConfig c = cfg;
    c.large_sample_normal = false;
    return single_quantity(m, ctx, c, model_index, 3);
}

EvidenceReport evaluate(const std::vector<ConstrainedModel>& models, const SufficientStats& stats, const McConfig& cfg,
                        std::vector<double> prior_probs) {
    validate(cfg);
    if (models.empty()) fail(Errc::InvalidConfig, "at least one hypothesis is required");
    std::map<std::string, std::size_t> by_name;
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i].name.empty()) fail(Errc::InvalidConfig, "every hypothesis needs a name");
        if (!by_name.emplace(models[i].name, i).second) fail(Errc::InvalidConfig, "duplicate model name '" + models[i].name + "'");
    }
    if (prior_probs.empty()) prior_probs.assign(models.size(), 1.0 / double(models.size()));

    const EvidenceContext ctx = EvidenceContext::build(stats);
    EvidenceReport report;
    report.N = int(stats.N());
    report.J = stats.J;
    report.L = stats.L;
    report.P = stats.P;
    report.draws = cfg.draws;
    report.seed = cfg.seed;
    report.large_sample_normal = cfg.large_sample_normal;
    report.models.resize(models.size());

    std::vector<Plan> plans;
    std::vector<std::ptrdiff_t> plan_of(models.size(), -1);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const ConstrainedModel& m = models[i];
        ModelEvidence& e = report.models[i];
        e.name = m.name;
        e.hypothesis = m.source;
        e.warnings = m.warnings;
        if (m.is_complement) {
            e.method = Method::Complement;
            continue;
        }
        if (m.unconstrained()) continue;
        plan_of[i] = std::ptrdiff_t(plans.size());
        plans.push_back(make_plan(m, i, ctx, cfg, false));
    }
    run_draws(plans, ctx, cfg);
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (plan_of[i] < 0) continue;
        const Plan& p = plans[std::size_t(plan_of[i])];
        ModelEvidence& e = report.models[i];
        e.method = method_of(p);
        collect(p, ctx, cfg, e);
    }

    for (std::size_t i = 0; i < models.size(); ++i) {
        const ConstrainedModel& m = models[i];
        if (!m.is_complement) continue;
        std::vector<std::string> names = m.complement_of;
        if (names.empty()) {
            for (const auto& other : models) {
                if (!other.is_complement) names.push_back(other.name);
            }
        }
        std::vector<const Plan*> members;
        std::vector<Quantity> f, c;
        for (const auto& n : names) {
            auto it = by_name.find(n);
            if (it == by_name.end()) fail(Errc::UnresolvedComplement, "complement '" + m.name + "' names unknown model '" + n + "'");
            const ConstrainedModel& member = models[it->second];
            if (member.is_complement) {
                fail(Errc::UnresolvedComplement, "complement '" + m.name + "' cannot include another complement");
            }
            if (member.unconstrained()) {
                fail(Errc::UnresolvedComplement, "complement '" + m.name + "' of the unconstrained model is empty");
            }
            // equality members have no volume and drop out
            if (member.equalities() > 0) continue;
            members.push_back(&plans[std::size_t(plan_of[it->second])]);
            f.push_back(*report.models[it->second].fO);
            c.push_back(*report.models[it->second].cO);
        }
        if (members.empty()) {
            fail(Errc::UnresolvedComplement, "complement '" + m.name + "' requires at least one order-constrained member model");
        }
        check_overlap(members, ctx, cfg, i, m.name);
        ModelEvidence& e = report.models[i];
        e.fO = complement_quantity(members, f, true);
        e.cO = complement_quantity(members, c, false);
    }

    std::vector<double> lbf(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        ModelEvidence& e = report.models[i];
        note_clipping(e);
        e.log_bf = bayes_factor_log(e);
        lbf[i] = e.log_bf;
    }
    const std::vector<double> post = posterior_probs(lbf, prior_probs);
    for (std::size_t i = 0; i < models.size(); ++i) {
        report.models[i].prior_prob = prior_probs[i];
        report.models[i].posterior_prob = post[i];
    }
    return report;
}

} // namespace cbf
