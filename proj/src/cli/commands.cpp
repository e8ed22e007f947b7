#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cbf/cli.hpp"
#include "cbf/error.hpp"

namespace cbf::cli {

namespace {

struct Overrides {
    std::string config;
    std::string data;
    std::string store;
    std::string format;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> draws;
    std::optional<int> threads;
};

AnalysisConfig configure(const Overrides& o, bool needs_hypotheses = true) {
    if (o.config.empty()) fail(Errc::InvalidConfig, "--config is required");
    AnalysisConfig c = load_config(o.config);
    if (!o.data.empty()) c.data = o.data;
    if (!o.store.empty()) c.store = o.store;
    if (!o.format.empty()) c.format = o.format;
    if (o.seed) c.mc.seed = *o.seed;
    if (o.draws) c.mc.draws = *o.draws;
    if (o.threads) {
        c.mc.threads = *o.threads;
    } else if (const char* env = std::getenv("CBF_THREADS"); env && *env) {
        try {
            c.mc.threads = std::stoi(env);
        } catch (const std::exception&) {
            fail(Errc::InvalidConfig, std::string("CBF_THREADS must be an integer, got '") + env + "'");
        }
    }
    if (c.mc.threads < 0) fail(Errc::InvalidConfig, "thread count must be non-negative");
    c.imputation.options.threads = c.mc.threads;
    if (needs_hypotheses) validate(c);
    return c;
}

std::string render(const EvidenceReport& r, const AnalysisConfig& c, const RenderContext& ctx) {
    return c.format == "json" ? render_json(r, ctx) : render_table(r, ctx);
}

struct Loaded {
    SufficientStats stats;
    StoreDescriptor descriptor;
};

Loaded from_data(const AnalysisConfig& c, const std::vector<std::string>& groups) {
    const Frame f = to_frame(read_csv_file(*c.data), c, groups, false);
    Loaded l;
    l.descriptor = descriptor_of(c, f.group_labels);
    l.stats = sufficient_stats(f.batch);
    if (int(l.stats.groups.size()) != l.descriptor.J) fail(Errc::InvalidBatch, "group table is inconsistent");
    return l;
}

StoreDescriptor expected_frame(const AnalysisConfig& c, int J) {
    StoreDescriptor d = descriptor_of(c, c.groups);
    d.J = c.groups.empty() ? J : int(c.groups.size());
    return d;
}

Store load_store(const AnalysisConfig& c) {
    Store probe = load(*c.store);
    return load(*c.store, expected_frame(c, probe.descriptor.J));
}

EvidenceReport analyze_stats(const Loaded& l, const AnalysisConfig& c) {
    const ParameterTable table = parameter_table(l.descriptor);
    return evaluate(parse_models(c, table), l.stats, c.mc, c.prior_probs);
}

int cmd_analyze(const Overrides& o, std::ostream& out) {
    const AnalysisConfig c = configure(o);
    Loaded l;
    if (c.data) {
        l = from_data(c, c.groups);
        if (c.store) {
            StoreLock lock(*c.store);
            const std::string now = utc_timestamp();
            save(Store{l.descriptor, l.stats, now, now}, *c.store);
        }
    } else if (c.store) {
        Store s = load_store(c);
        l = {std::move(s.stats), std::move(s.descriptor)};
    } else {
        fail(Errc::InvalidConfig, "analyze needs --data or --store");
    }
    out << render(analyze_stats(l, c), c, {l.descriptor.group_labels});
    return 0;
}

int cmd_update(const Overrides& o, std::ostream& out) {
    const AnalysisConfig c = configure(o);
    if (!c.store) fail(Errc::InvalidConfig, "update needs --store");
    if (!c.data) fail(Errc::InvalidConfig, "update needs --data with the new batch");
    StoreLock lock(*c.store);
    Loaded l;
    std::string created = utc_timestamp();
    if (std::filesystem::exists(*c.store)) {
        Store s = load_store(c);
        const Frame f = to_frame(read_csv_file(*c.data), c, s.descriptor.group_labels, false);
        l.stats = merge(s.stats, f.batch);
        l.descriptor = std::move(s.descriptor);
        if (!s.created.empty()) created = s.created;
    } else {
        l = from_data(c, c.groups);
    }
    save(Store{l.descriptor, l.stats, created, utc_timestamp()}, *c.store);
    out << render(analyze_stats(l, c), c, {l.descriptor.group_labels});
    return 0;
}

int cmd_simulate(const Overrides& o, std::ostream& out) {
    const AnalysisConfig c = configure(o, false);
    if (!c.simulation) fail(Errc::InvalidConfig, "simulate needs a 'simulation' section in the configuration");
    if (c.hypotheses.empty()) fail(Errc::InvalidConfig, "at least one hypothesis is required");
    cbf::validate(c.mc);
    const SimulationConfig& s = *c.simulation;
    validate(s.truth);
    StoreDescriptor d;
    d.J = int(s.truth.proportions.size());
    d.L = s.truth.covariates;
    d.P = int(s.truth.theta.cols());
    const auto models = parse_models(c, parameter_table(d));
    const auto rows = consistency_sim(models, s.truth, s.options, c.mc);
    const std::string csv = render_consistency_csv(rows);
    out << csv;
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p);
        if (!f || !(f << text)) fail(Errc::Io, "cannot write '" + p.string() + "'");
    };
    if (s.csv) write(*s.csv, csv);
    if (s.svg) {
        std::string title = "log BF(" + s.options.target + " vs " +
                            (s.options.competitor.empty() ? std::string("unconstrained") : s.options.competitor) + ")";
        write(*s.svg, render_consistency_svg(rows, title));
    }
    return 0;
}

ImputedSet external_set(const AnalysisConfig& c, const Frame& original) {
    const auto& dir = *c.imputation.external_dir;
    if (!std::filesystem::is_directory(dir)) fail(Errc::Io, "imputation directory '" + dir.string() + "' not found");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() == ".csv" && e.path().filename() != "mask.csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    ImputedSet set;
    const CsvTable mask = read_csv_file(dir / "mask.csv");
    const auto n = original.batch.y.rows(), P = original.batch.y.cols();
    if (Eigen::Index(mask.rows.size()) != n) fail(Errc::MaskMismatch, "mask.csv row count differs from the data");
    set.observed.resize(n, P);
    for (Eigen::Index p = 0; p < P; ++p) {
        const std::size_t col = mask.column(c.outcomes[std::size_t(p)]);
        for (Eigen::Index i = 0; i < n; ++i) {
            const std::string& v = mask.rows[std::size_t(i)][col];
            if (v != "0" && v != "1") fail(Errc::MaskMismatch, "mask.csv entries must be 0 or 1");
            set.observed(i, p) = v == "1";
        }
    }
    for (const auto& f : files) {
        set.imputations.push_back(to_frame(read_csv_file(f), c, original.group_labels, false).batch);
    }
    check_imputations(original.batch, set);
    return set;
}

int cmd_impute(const Overrides& o, std::ostream& out) {
    const AnalysisConfig c = configure(o);
    if (!c.data) fail(Errc::InvalidConfig, "impute needs --data");
    const Frame f = to_frame(read_csv_file(*c.data), c, c.groups, true);
    const ImputedSet set = c.imputation.external_dir ? external_set(c, f)
                                                     : impute_outcomes(f.batch, c.imputation.options, c.mc.seed);
    const StoreDescriptor d = descriptor_of(c, f.group_labels);
    const auto models = parse_models(c, parameter_table(d));
    const AveragedReport avg = average_evidence(models, set, c.mc, c.prior_probs);
    out << render(avg.report, c, {f.group_labels, &avg.between_sd, avg.imputations});
    return 0;
}

void add_common(CLI::App* sub, Overrides& o) {
    sub->add_option("--config", o.config, "JSON configuration file")->required();
    sub->add_option("--data", o.data, "CSV data file (overrides the configuration)");
    sub->add_option("--store", o.store, "sufficient-statistics store");
    sub->add_option("--format", o.format, "output format")->check(CLI::IsMember({"table", "json"}));
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--draws", o.draws, "Monte Carlo draws");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores; default CBF_THREADS)");
}

} // namespace

int exit_code(Errc code) noexcept {
    switch (code) {
    case Errc::NotPositiveDefinite:
    case Errc::InvalidDof:
    case Errc::DimensionMismatch:
    case Errc::NonFiniteInput:
    case Errc::SingularDesign:
    case Errc::InsufficientData:
    case Errc::FractionExceedsOne:
    case Errc::SingularFractionalDesign:
    case Errc::SingularFractionalScatter:
    case Errc::SingularConditioningBlock:
    case Errc::DegenerateTransform:
        return 3;
    case Errc::Io:
    case Errc::StaleLock:
    case Errc::LockHeld:
        return 1;
    default:
        return 2;
    }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Default Bayes factors for constrained multivariate linear models"};
    app.require_subcommand(1);
    Overrides o;
    CLI::App* analyze = app.add_subcommand("analyze", "evidence for the configured hypotheses");
    CLI::App* update = app.add_subcommand("update", "merge a new batch into a store and re-run the analysis");
    CLI::App* simulate = app.add_subcommand("simulate", "consistency simulation");
    CLI::App* impute = app.add_subcommand("impute", "analysis averaged over imputations of missing outcomes");
    for (CLI::App* sub : {analyze, update, simulate, impute}) add_common(sub, o);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    try {
        if (analyze->parsed()) return cmd_analyze(o, out);
        if (update->parsed()) return cmd_update(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out);
        return cmd_impute(o, out);
    } catch (const Error& e) {
        err << "error [" << module_of(e.code()) << "/" << to_string(e.code()) << "]: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace cbf::cli
