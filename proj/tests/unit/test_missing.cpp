#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cbf/missing.hpp"
#include "support/check.hpp"
#include "support/data.hpp"

using namespace cbf;

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

McConfig config() {
    McConfig cfg;
    cfg.draws = 2'000;
    cfg.threads = 0;
    return cfg;
}

std::vector<ConstrainedModel> models(const ParameterTable& names) {
    return {parse("mu1_1 = mu2_1", names, "eq"), parse("mu1_2 > mu2_2 > mu3_2", names, "ord"),
            parse("mu1_1 > mu1_2 & mu2_1 = mu3_1", names, "mixed")};
}

bool same_report(const EvidenceReport& a, const EvidenceReport& b) {
    for (std::size_t i = 0; i < a.models.size(); ++i) {
        if (a.models[i].log_bf != b.models[i].log_bf) return false;
        if (a.models[i].posterior_prob != b.models[i].posterior_prob) return false;
    }
    return true;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

} // namespace

TEST_CASE("complete data give identical imputations") {
    const DataBatch b = testing::random_batch(45, 3, 1, 2, 1);
    ImputeOptions opts;
    opts.imputations = 4;
    const auto set = impute_outcomes(b, opts, 7);
    REQUIRE(set.imputations.size() == 4);
    for (const auto& m : set.imputations) CHECK(m.y == b.y);
    CHECK(set.observed.all());

    const ParameterTable names(3, 1, 2);
    const auto avg = average_evidence(models(names), set, config());
    const auto full = evaluate(models(names), sufficient_stats(b), config());
    CHECK(same_report(avg.report, full));
    for (const auto& s : avg.between_sd) {
        if (s.fE) CHECK(*s.fE == 0.0);
        if (s.fO) CHECK(*s.fO == 0.0);
    }
}

TEST_CASE("one imputation is the standard pipeline on that data set") {
    DataBatch b = testing::random_batch(45, 3, 1, 2, 2);
    b.y(4, 1) = kNaN;
    b.y(10, 0) = kNaN;
    ImputeOptions opts;
    opts.imputations = 1;
    const auto set = impute_outcomes(b, opts, 3);
    const ParameterTable names(3, 1, 2);
    const auto avg = average_evidence(models(names), set, config());
    const auto direct = evaluate(models(names), sufficient_stats(set.imputations[0]), config());
    CHECK(same_report(avg.report, direct));
    CHECK(avg.imputations == 1);
}

TEST_CASE("imputation keeps observed entries and is reproducible") {
    DataBatch b = testing::random_batch(60, 3, 1, 2, 4);
    std::mt19937_64 gen(5);
    std::bernoulli_distribution drop(0.15);
    for (Eigen::Index i = 0; i < b.y.rows(); ++i) {
        for (Eigen::Index p = 0; p < 2; ++p) {
            if (drop(gen)) b.y(i, p) = kNaN;
        }
    }
    ImputeOptions opts;
    opts.imputations = 5;
    opts.burn_in = 20;
    const auto set = impute_outcomes(b, opts, 11);
    CHECK((set.observed == observed_mask(b)).all());
    for (const auto& m : set.imputations) {
        CHECK(m.y.allFinite());
        for (Eigen::Index i = 0; i < b.y.rows(); ++i) {
            for (Eigen::Index p = 0; p < 2; ++p) {
                if (set.observed(i, p)) CHECK(m.y(i, p) == b.y(i, p));
            }
        }
    }
    CHECK(set.imputations[0].y != set.imputations[1].y);
    CHECK_NOTHROW(check_imputations(b, set));

    opts.threads = 4;
    const auto again = impute_outcomes(b, opts, 11);
    for (std::size_t m = 0; m < 5; ++m) CHECK(again.imputations[m].y == set.imputations[m].y);

    // ordering of the imputations does not matter
    ImputedSet reversed = set;
    std::reverse(reversed.imputations.begin(), reversed.imputations.end());
    const ParameterTable names(3, 1, 2);
    const auto a = average_evidence(models(names), set, config());
    const auto r = average_evidence(models(names), reversed, config());
    for (std::size_t i = 0; i < a.report.models.size(); ++i) {
        CHECK(a.report.models[i].log_bf == doctest::Approx(r.report.models[i].log_bf).epsilon(1e-12));
    }
}

TEST_CASE("conditional draws follow the analytic conditional normal") {
    Matrix sigma(3, 3);
    sigma << 2.0, 0.6, -0.4, 0.6, 1.0, 0.3, -0.4, 0.3, 1.5;
    const Vector mean = Eigen::Vector3d(1.0, -0.5, 2.0);
    // y2 missing given y1 = 1.7, y3 = 1.1
    Matrix soo(2, 2);
    soo << 2.0, -0.4, -0.4, 1.5;
    const Eigen::RowVector2d smo(0.6, 0.3);
    const Vector dev = Eigen::Vector2d(1.7 - 1.0, 1.1 - 2.0);
    const double cm = -0.5 + (smo * soo.inverse() * dev)(0);
    const double cv = 1.0 - (smo * soo.inverse() * smo.transpose())(0);

    const int n = 10'000;
    std::vector<double> draws;
    for (int i = 0; i < n; ++i) {
        Rng rng(99, 1, std::uint32_t(i));
        Vector y = Eigen::Vector3d(1.7, kNaN, 1.1);
        draw_conditional_outcomes(y, mean, sigma, rng);
        CHECK(y[0] == 1.7);
        CHECK(y[2] == 1.1);
        draws.push_back(y[1]);
    }
    std::sort(draws.begin(), draws.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = phi((draws[std::size_t(i)] - cm) / std::sqrt(cv));
        d = std::max({d, std::abs(f - double(i) / n), std::abs(f - double(i + 1) / n)});
    }
    MESSAGE("KS D = ", d);
    // 1% critical value of the one-sample statistic
    CHECK(d < 1.628 / std::sqrt(double(n)));
}

TEST_CASE("imputed values centre on the conditional means of deleted entries") {
    // bivariate outcome with correlation 0.6, group means 0, 1, 2
    const int N = 1500, J = 3;
    const double rho = 0.6;
    std::mt19937_64 gen(21);
    std::normal_distribution<double> z;
    std::bernoulli_distribution drop(0.10);
    DataBatch b;
    b.groups = J;
    b.y.resize(N, 2);
    b.w = Matrix(N, 0);
    std::vector<std::pair<int, double>> deleted;  // row, conditional mean
    for (int i = 0; i < N; ++i) {
        const int g = i % J;
        b.group.push_back(g);
        const double e1 = z(gen), e2 = rho * e1 + std::sqrt(1 - rho * rho) * z(gen);
        b.y(i, 0) = g + e1;
        b.y(i, 1) = g + e2;
        if (drop(gen)) {
            deleted.emplace_back(i, g + rho * (b.y(i, 1) - g));
            b.y(i, 0) = kNaN;
        }
    }
    ImputeOptions opts;
    opts.imputations = 20;
    opts.burn_in = 50;
    opts.threads = 0;
    const auto set = impute_outcomes(b, opts, 5);
    std::vector<double> diff;
    for (const auto& [row, cond] : deleted) {
        double s = 0;
        for (const auto& m : set.imputations) s += m.y(row, 0);
        diff.push_back(s / opts.imputations - cond);
    }
    const double n = double(diff.size());
    double mean = 0, var = 0;
    for (double x : diff) mean += x / n;
    for (double x : diff) var += (x - mean) * (x - mean) / (n - 1);
    // per-entry spread plus the estimation error of a group mean
    const double se = std::sqrt(var / n + J / double(N));
    MESSAGE("mean difference ", mean, " se ", se);
    CHECK(std::abs(mean) < 3.0 * se);
}

TEST_CASE("imputation errors") {
    DataBatch b = testing::random_batch(30, 3, 1, 1, 8);
    b.w(3, 0) = kNaN;
    CHECK_ERRC(impute_outcomes(b, {}, 1), Errc::MissingInCovariates);

    DataBatch sparse = testing::random_batch(30, 3, 1, 1, 9);
    for (int i = 0; i < 27; ++i) sparse.y(i, 0) = kNaN;
    CHECK_ERRC(impute_outcomes(sparse, {}, 1), Errc::TooFewCompleteCases);

    DataBatch ok = testing::random_batch(30, 3, 1, 2, 10);
    ok.y(2, 1) = kNaN;
    ImputeOptions opts;
    opts.imputations = 2;
    opts.burn_in = 5;
    auto set = impute_outcomes(ok, opts, 1);
    ImputedSet altered = set;
    altered.imputations[1].y(0, 0) += 1.0;
    CHECK_ERRC(check_imputations(ok, altered), Errc::MaskMismatch);
    ImputedSet incomplete = set;
    incomplete.imputations[0].y(2, 1) = kNaN;
    CHECK_ERRC(check_imputations(ok, incomplete), Errc::MaskMismatch);
    ImputedSet shape = set;
    shape.imputations[0] = testing::rows(shape.imputations[0], 0, 20);
    CHECK_ERRC(check_imputations(ok, shape), Errc::MaskMismatch);
    ImputedSet mask = set;
    mask.observed(0, 0) = false;
    CHECK_ERRC(check_imputations(ok, mask), Errc::MaskMismatch);
    opts.imputations = 0;
    CHECK_ERRC(impute_outcomes(ok, opts, 1), Errc::InvalidConfig);
}
