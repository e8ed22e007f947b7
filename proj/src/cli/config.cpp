#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cbf/cli.hpp"
#include "cbf/error.hpp"

namespace cbf::cli {

namespace {

using Json = nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

Matrix to_matrix(const Json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) fail(Errc::InvalidConfig, what + " must be an array of rows");
    const auto rows = Eigen::Index(j.size()), cols = Eigen::Index(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (Eigen::Index(j[std::size_t(r)].size()) != cols) fail(Errc::InvalidConfig, what + " has ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[std::size_t(r)][std::size_t(c)].get<double>();
    }
    return m;
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        if (!allowed.contains(k)) fail(Errc::InvalidConfig, "unknown key '" + k + "' in " + where);
    }
}

MethodChoice method_of(const std::string& s) {
    if (s == "auto") return MethodChoice::Auto;
    if (s == "analytic") return MethodChoice::Analytic;
    if (s == "monte-carlo" || s == "mc") return MethodChoice::MonteCarlo;
    fail(Errc::InvalidConfig, "monte_carlo.method must be auto, analytic or monte-carlo");
}

void read_mc(const Json& j, McConfig& mc) {
    check_keys(j, {"draws", "seed", "threads", "qmc_points", "method", "large_sample_normal", "overlap_draws"},
               "monte_carlo");
    if (j.contains("draws")) mc.draws = j["draws"].get<std::size_t>();
    if (j.contains("seed")) mc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) mc.threads = j["threads"].get<int>();
    if (j.contains("qmc_points")) mc.qmc_points = j["qmc_points"].get<std::size_t>();
    if (j.contains("method")) mc.method = method_of(j["method"].get<std::string>());
    if (j.contains("large_sample_normal")) mc.large_sample_normal = j["large_sample_normal"].get<bool>();
    if (j.contains("overlap_draws")) mc.overlap_draws = j["overlap_draws"].get<std::size_t>();
}

void read_orthant(const Json& j, OrthantOptions& o) {
    check_keys(j, {"abs_tol", "max_evaluations", "shifts"}, "orthant");
    if (j.contains("abs_tol")) o.abs_tol = j["abs_tol"].get<double>();
    if (j.contains("max_evaluations")) o.max_evaluations = j["max_evaluations"].get<std::size_t>();
    if (j.contains("shifts")) o.shifts = j["shifts"].get<int>();
}

SimulationConfig read_simulation(const Json& j, const std::filesystem::path& base) {
    check_keys(j, {"truth", "n_grid", "replications", "target", "competitor", "csv", "svg"}, "simulation");
    SimulationConfig s;
    const Json& t = j.at("truth");
    check_keys(t, {"theta", "sigma", "proportions", "covariates"}, "simulation.truth");
    s.truth.theta = to_matrix(t.at("theta"), "simulation.truth.theta");
    s.truth.sigma = to_matrix(t.at("sigma"), "simulation.truth.sigma");
    s.truth.proportions = t.at("proportions").get<std::vector<double>>();
    s.truth.covariates = t.value("covariates", 0);
    if (j.contains("n_grid")) s.options.n_grid = j["n_grid"].get<std::vector<int>>();
    if (j.contains("replications")) s.options.replications = j["replications"].get<int>();
    s.options.target = j.at("target").get<std::string>();
    s.options.competitor = j.value("competitor", "");
    if (j.contains("csv")) s.csv = resolve(base, j["csv"].get<std::string>());
    if (j.contains("svg")) s.svg = resolve(base, j["svg"].get<std::string>());
    return s;
}

} // namespace

AnalysisConfig parse_config(const std::string& json_text, const std::filesystem::path& base) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::exception& e) {
        fail(Errc::InvalidConfig, std::string("configuration is not valid JSON: ") + e.what());
    }
    AnalysisConfig c;
    try {
        check_keys(j, {"data", "outcomes", "group", "covariates", "groups", "hypotheses", "prior_probabilities",
                       "monte_carlo", "orthant", "format", "store", "imputation", "simulation"},
                   "configuration");
        if (j.contains("data")) c.data = resolve(base, j["data"].get<std::string>());
        if (j.contains("outcomes")) {
            c.outcomes = j["outcomes"].is_string() ? std::vector<std::string>{j["outcomes"].get<std::string>()}
                                                   : j["outcomes"].get<std::vector<std::string>>();
        }
        c.group = j.value("group", "");
        if (j.contains("covariates")) c.covariates = j["covariates"].get<std::vector<std::string>>();
        if (j.contains("groups")) c.groups = j["groups"].get<std::vector<std::string>>();
        if (j.contains("hypotheses")) {
            for (const auto& h : j["hypotheses"]) {
                if (h.is_string()) {
                    c.hypotheses.push_back({"H" + std::to_string(c.hypotheses.size() + 1), h.get<std::string>()});
                } else {
                    check_keys(h, {"name", "constraint"}, "hypotheses");
                    c.hypotheses.push_back({h.at("name").get<std::string>(), h.at("constraint").get<std::string>()});
                }
            }
        }
        if (j.contains("prior_probabilities")) c.prior_probs = j["prior_probabilities"].get<std::vector<double>>();
        if (j.contains("monte_carlo")) read_mc(j["monte_carlo"], c.mc);
        if (j.contains("orthant")) read_orthant(j["orthant"], c.mc.orthant);
        c.format = j.value("format", "table");
        if (j.contains("store")) c.store = resolve(base, j["store"].get<std::string>());
        if (j.contains("imputation")) {
            const Json& m = j["imputation"];
            check_keys(m, {"imputations", "burn_in", "external_dir"}, "imputation");
            c.imputation.options.imputations = m.value("imputations", 50);
            c.imputation.options.burn_in = m.value("burn_in", 100);
            if (m.contains("external_dir")) c.imputation.external_dir = resolve(base, m["external_dir"].get<std::string>());
        }
        if (j.contains("simulation")) c.simulation = read_simulation(j["simulation"], base);
    } catch (const Json::exception& e) {
        fail(Errc::InvalidConfig, std::string("configuration field has the wrong type: ") + e.what());
    }
    return c;
}

AnalysisConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot open configuration '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

void validate(const AnalysisConfig& cfg) {
    if (cfg.hypotheses.empty()) fail(Errc::InvalidConfig, "at least one hypothesis is required");
    if (cfg.outcomes.empty()) fail(Errc::InvalidConfig, "at least one outcome column is required");
    if (cfg.group.empty()) fail(Errc::InvalidConfig, "the group column must be named");
    std::set<std::string> cols{cfg.group};
    for (const auto& c : cfg.outcomes) {
        if (!cols.insert(c).second) fail(Errc::InvalidConfig, "column '" + c + "' is used twice");
    }
    for (const auto& c : cfg.covariates) {
        if (!cols.insert(c).second) fail(Errc::InvalidConfig, "column '" + c + "' is used twice");
    }
    std::set<std::string> names;
    for (const auto& h : cfg.hypotheses) {
        if (!names.insert(h.name).second) fail(Errc::InvalidConfig, "hypothesis name '" + h.name + "' is used twice");
    }
    if (!cfg.prior_probs.empty() && cfg.prior_probs.size() != cfg.hypotheses.size()) {
        fail(Errc::InvalidConfig, "one prior probability per hypothesis is required");
    }
    if (!cfg.prior_probs.empty()) {
        double total = 0.0;
        for (double p : cfg.prior_probs) {
            if (!(p >= 0.0)) fail(Errc::InvalidConfig, "prior probabilities must be non-negative");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) fail(Errc::InvalidConfig, "prior probabilities must sum to 1");
    }
    if (cfg.format != "table" && cfg.format != "json") fail(Errc::InvalidConfig, "format must be table or json");
    cbf::validate(cfg.mc);
}

StoreDescriptor descriptor_of(const AnalysisConfig& cfg, const std::vector<std::string>& group_labels) {
    StoreDescriptor d;
    d.J = int(group_labels.size());
    d.L = int(cfg.covariates.size());
    d.P = int(cfg.outcomes.size());
    d.group_labels = group_labels;
    d.covariate_names = cfg.covariates;
    d.outcome_names = cfg.outcomes;
    return d;
}

ParameterTable parameter_table(const StoreDescriptor& d) {
    return ParameterTable(d.J, d.L, d.P, d.group_labels, d.covariate_names, d.outcome_names);
}

std::vector<ConstrainedModel> parse_models(const AnalysisConfig& cfg, const ParameterTable& table) {
    std::vector<ConstrainedModel> out;
    for (const auto& h : cfg.hypotheses) out.push_back(parse(h.constraint, table, h.name));
    return out;
}

} // namespace cbf::cli
