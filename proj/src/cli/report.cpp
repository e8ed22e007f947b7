#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "cbf/cli.hpp"
#include "cbf/error.hpp"

namespace cbf::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kQuantities[4] = {"fE", "cE", "fO", "cO"};
constexpr std::optional<Quantity> ModelEvidence::*kFields[4] = {&ModelEvidence::fE, &ModelEvidence::cE,
                                                                &ModelEvidence::fO, &ModelEvidence::cO};
constexpr std::optional<double> QuantitySpread::*kSpread[4] = {&QuantitySpread::fE, &QuantitySpread::cE,
                                                               &QuantitySpread::fO, &QuantitySpread::cO};

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_of(const Json& j) {
    return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

Method method_from(const std::string& s) {
    for (Method m : {Method::None, Method::Analytic, Method::MonteCarlo, Method::SamplingFallback,
                     Method::LargeSampleNormal, Method::Complement}) {
        if (to_string(m) == s) return m;
    }
    fail(Errc::InvalidConfig, "unknown method '" + s + "' in report");
}

std::string sig3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

std::string table_text(const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> width;
    for (const auto& row : cells) {
        width.resize(std::max(width.size(), row.size()), 0);
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    for (const auto& row : cells) {
        std::string line;
        for (std::size_t c = 0; c < row.size(); ++c) {
            std::string cell = row[c];
            if (c + 1 < row.size()) cell.resize(width[c], ' ');
            line += cell;
            if (c + 1 < row.size()) line += "  ";
        }
        out << line << '\n';
    }
    return out.str();
}

} // namespace

std::string render_json(const EvidenceReport& r, const RenderContext& ctx) {
    Json j;
    j["frame"] = {{"N", r.N}, {"J", r.J}, {"L", r.L}, {"P", r.P}, {"groups", ctx.group_labels}};
    j["settings"] = {{"draws", r.draws}, {"seed", r.seed}, {"large_sample_normal", r.large_sample_normal}};
    if (ctx.imputations > 0) j["imputations"] = ctx.imputations;
    Json models = Json::array();
    for (std::size_t i = 0; i < r.models.size(); ++i) {
        const ModelEvidence& m = r.models[i];
        Json mj;
        mj["name"] = m.name;
        mj["hypothesis"] = m.hypothesis;
        mj["method"] = std::string(to_string(m.method));
        for (int k = 0; k < 4; ++k) {
            const auto& q = m.*kFields[k];
            if (!q) continue;
            Json qj = {{"value", number(q->value)},
                       {"log_value", number(q->log_value)},
                       {"mc_se", number(q->mc_se)},
                       {"cdf_error", number(q->cdf_error)},
                       {"clipped", q->clipped}};
            if (ctx.between_sd) {
                const auto& sd = (*ctx.between_sd)[i].*kSpread[k];
                if (sd) qj["between_sd"] = number(*sd);
            }
            mj[kQuantities[k]] = qj;
        }
        mj["log_bf"] = number(m.log_bf);
        mj["bf"] = number(std::exp(m.log_bf));
        mj["prior_prob"] = number(m.prior_prob);
        mj["posterior_prob"] = number(m.posterior_prob);
        mj["warnings"] = m.warnings;
        models.push_back(mj);
    }
    j["models"] = models;
    return j.dump(2) + "\n";
}

ParsedReport parse_report_json(const std::string& text) {
    ParsedReport out;
    try {
        const Json j = Json::parse(text);
        EvidenceReport& r = out.report;
        const Json& f = j.at("frame");
        r.N = f.at("N").get<int>();
        r.J = f.at("J").get<int>();
        r.L = f.at("L").get<int>();
        r.P = f.at("P").get<int>();
        out.group_labels = f.at("groups").get<std::vector<std::string>>();
        const Json& s = j.at("settings");
        r.draws = s.at("draws").get<std::size_t>();
        r.seed = s.at("seed").get<std::uint64_t>();
        r.large_sample_normal = s.at("large_sample_normal").get<bool>();
        out.imputations = j.value("imputations", 0);
        for (const Json& mj : j.at("models")) {
            ModelEvidence m;
            QuantitySpread sd;
            m.name = mj.at("name").get<std::string>();
            m.hypothesis = mj.at("hypothesis").get<std::string>();
            m.method = method_from(mj.at("method").get<std::string>());
            for (int k = 0; k < 4; ++k) {
                if (!mj.contains(kQuantities[k])) continue;
                const Json& qj = mj[kQuantities[k]];
                Quantity q;
                q.value = number_of(qj.at("value"));
                q.log_value = number_of(qj.at("log_value"));
                q.mc_se = number_of(qj.at("mc_se"));
                q.cdf_error = number_of(qj.at("cdf_error"));
                q.clipped = qj.at("clipped").get<bool>();
                m.*kFields[k] = q;
                if (qj.contains("between_sd")) sd.*kSpread[k] = number_of(qj["between_sd"]);
            }
            m.log_bf = number_of(mj.at("log_bf"));
            m.prior_prob = number_of(mj.at("prior_prob"));
            m.posterior_prob = number_of(mj.at("posterior_prob"));
            m.warnings = mj.at("warnings").get<std::vector<std::string>>();
            r.models.push_back(std::move(m));
            out.between_sd.push_back(sd);
        }
    } catch (const Json::exception& e) {
        fail(Errc::InvalidConfig, std::string("malformed report JSON: ") + e.what());
    }
    return out;
}

std::string render_table(const EvidenceReport& r, const RenderContext& ctx) {
    std::ostringstream out;
    out << "N = " << r.N << ", J = " << r.J << ", L = " << r.L << ", P = " << r.P << "; draws = " << r.draws
        << ", seed = " << r.seed;
    if (r.large_sample_normal) out << "; large-sample normal posterior";
    if (ctx.imputations > 0) out << "; averaged over " << ctx.imputations << " imputations";
    out << '\n';
    if (!ctx.group_labels.empty()) {
        out << "groups:";
        for (std::size_t j = 0; j < ctx.group_labels.size(); ++j) {
            out << (j ? ", " : " ") << j + 1 << " = " << ctx.group_labels[j];
        }
        out << '\n';
    }
    out << '\n';
    std::vector<std::vector<std::string>> cells{
        {"model", "method", "fE", "se", "cE", "se", "fO", "se", "cO", "se", "B_tu", "P(M|Y)"}};
    for (const ModelEvidence& m : r.models) {
        std::vector<std::string> row{m.name, std::string(to_string(m.method))};
        for (int k = 0; k < 4; ++k) {
            const auto& q = m.*kFields[k];
            row.push_back(q ? sig3(q->value) : "-");
            row.push_back(q ? sig3(q->mc_se) : "-");
        }
        row.push_back(sig3(std::exp(m.log_bf)));
        row.push_back(sig3(m.posterior_prob));
        cells.push_back(std::move(row));
    }
    out << table_text(cells);
    if (ctx.between_sd && ctx.imputations > 1) {
        out << "\nbetween-imputation SD\n";
        std::vector<std::vector<std::string>> sd{{"model", "fE", "cE", "fO", "cO"}};
        for (std::size_t i = 0; i < r.models.size(); ++i) {
            std::vector<std::string> row{r.models[i].name};
            for (int k = 0; k < 4; ++k) {
                const auto& v = (*ctx.between_sd)[i].*kSpread[k];
                row.push_back(v ? sig3(*v) : "-");
            }
            sd.push_back(std::move(row));
        }
        out << table_text(sd);
    }
    bool header = false;
    for (const ModelEvidence& m : r.models) {
        for (const auto& w : m.warnings) {
            if (!header) out << "\nwarnings\n";
            header = true;
            out << "  " << m.name << ": " << w << '\n';
        }
    }
    for (const ModelEvidence& m : r.models) out << "\n" << m.name << ": " << m.hypothesis;
    out << '\n';
    return out.str();
}

std::string render_consistency_csv(const std::vector<ConsistencyRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    out << "n,mean_log_bf,sd_log_bf,mean_target_fO\n";
    for (const auto& r : rows) out << r.n << ',' << r.mean_log_bf << ',' << r.sd_log_bf << ',' << r.mean_target_fO << '\n';
    return out.str();
}

std::string render_consistency_svg(const std::vector<ConsistencyRow>& rows, const std::string& title) {
    const double w = 480, h = 320, left = 60, right = 20, top = 40, bottom = 50;
    double lo = 0.0, hi = 0.0;
    for (const auto& r : rows) {
        lo = std::min(lo, r.mean_log_bf - r.sd_log_bf);
        hi = std::max(hi, r.mean_log_bf + r.sd_log_bf);
    }
    if (hi - lo < 1e-9) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    const std::size_t n = rows.size();
    auto x = [&](std::size_t i) { return left + (n > 1 ? double(i) / double(n - 1) : 0.5) * (w - left - right); };
    auto y = [&](double v) { return top + (hi - v) / (hi - lo) * (h - top - bottom); };
    std::ostringstream out;
    out.precision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\"" << h - bottom << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom << "\" stroke=\"black\"/>\n";
    if (lo < 0.0 && hi > 0.0) {
        out << "<line x1=\"" << left << "\" y1=\"" << y(0.0) << "\" x2=\"" << w - right << "\" y2=\"" << y(0.0)
            << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        out << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">" << sig3(v) << "</text>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < n; ++i) out << (i ? " " : "") << x(i) << ',' << y(rows[i].mean_log_bf);
    out << "\"/>\n";
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = rows[i];
        out << "<line x1=\"" << x(i) << "\" y1=\"" << y(r.mean_log_bf - r.sd_log_bf) << "\" x2=\"" << x(i) << "\" y2=\""
            << y(r.mean_log_bf + r.sd_log_bf) << "\" stroke=\"#1f77b4\"/>\n";
        out << "<circle cx=\"" << x(i) << "\" cy=\"" << y(r.mean_log_bf) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
        out << "<text x=\"" << x(i) << "\" y=\"" << h - bottom + 18 << "\" text-anchor=\"middle\">" << r.n << "</text>\n";
    }
    out << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">n</text>\n";
    out << "<text x=\"16\" y=\"" << (top + h - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (top + h - bottom) / 2 << ")\">mean log BF (+/- 1 SD)</text>\n";
    out << "</svg>\n";
    return out.str();
}

} // namespace cbf::cli
