#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "cbf/cli.hpp"
#include "cbf/error.hpp"

namespace cbf::cli {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Splits one record; double quotes protect commas and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, const std::string& where) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    if (quoted) fail(Errc::InvalidBatch, where + ": unterminated quote");
    out.push_back(trim(cell));
    return out;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

double to_number(const std::string& cell, const std::string& where) {
    double v = 0.0;
    const char* end = cell.data() + cell.size();
    const auto [p, ec] = std::from_chars(cell.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) fail(Errc::InvalidBatch, where + ": '" + cell + "' is not a number");
    return v;
}

} // namespace

std::size_t CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    fail(Errc::UnknownColumn, "column '" + name + "' not found in data header");
}

CsvTable read_csv(std::istream& in, const std::string& source) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no);
        auto cells = split_record(line, where);
        if (t.header.empty()) {
            t.header = std::move(cells);
            for (std::size_t i = 0; i < t.header.size(); ++i) {
                for (std::size_t j = 0; j < i; ++j) {
                    if (t.header[i] == t.header[j]) fail(Errc::InvalidBatch, where + ": duplicate column '" + t.header[i] + "'");
                }
            }
            continue;
        }
        if (cells.size() != t.header.size()) {
            fail(Errc::InvalidBatch, where + ": expected " + std::to_string(t.header.size()) + " fields, found " +
                                         std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
    }
    if (t.header.empty()) fail(Errc::InvalidBatch, source + ": no header row");
    return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot open data file '" + path.string() + "'");
    return read_csv(in, path.string());
}

Frame to_frame(const CsvTable& table, const AnalysisConfig& cfg, const std::vector<std::string>& known_groups,
               bool allow_missing) {
    const std::size_t gcol = table.column(cfg.group);
    std::vector<std::size_t> ycols, wcols;
    for (const auto& n : cfg.outcomes) ycols.push_back(table.column(n));
    for (const auto& n : cfg.covariates) wcols.push_back(table.column(n));

    Frame f;
    std::unordered_map<std::string, int> index;
    const bool fixed = !known_groups.empty();
    for (const auto& g : known_groups) {
        index.emplace(g, int(f.group_labels.size()));
        f.group_labels.push_back(g);
    }

    const auto n = Eigen::Index(table.rows.size());
    DataBatch& b = f.batch;
    b.y.resize(n, Eigen::Index(ycols.size()));
    b.w.resize(n, Eigen::Index(wcols.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[std::size_t(i)];
        const std::string where = "data row " + std::to_string(i + 1);
        const std::string& label = row[gcol];
        if (is_missing(label)) fail(Errc::InvalidBatch, where + ": group label is missing");
        auto it = index.find(label);
        if (it == index.end()) {
            if (fixed) fail(Errc::UnknownGroup, where + ": group '" + label + "' is not part of the model frame");
            it = index.emplace(label, int(f.group_labels.size())).first;
            f.group_labels.push_back(label);
        }
        b.group.push_back(it->second);
        for (std::size_t p = 0; p < ycols.size(); ++p) {
            const std::string& cell = row[ycols[p]];
            if (is_missing(cell)) {
                if (!allow_missing) {
                    fail(Errc::InvalidBatch, where + ": outcome '" + cfg.outcomes[p] + "' is missing; use the impute command");
                }
                b.y(i, Eigen::Index(p)) = std::numeric_limits<double>::quiet_NaN();
            } else {
                b.y(i, Eigen::Index(p)) = to_number(cell, where + ", column '" + cfg.outcomes[p] + "'");
            }
        }
        for (std::size_t l = 0; l < wcols.size(); ++l) {
            const std::string& cell = row[wcols[l]];
            if (is_missing(cell)) {
                if (!allow_missing) fail(Errc::InvalidBatch, where + ": covariate '" + cfg.covariates[l] + "' is missing");
                b.w(i, Eigen::Index(l)) = std::numeric_limits<double>::quiet_NaN();
            } else {
                b.w(i, Eigen::Index(l)) = to_number(cell, where + ", column '" + cfg.covariates[l] + "'");
            }
        }
    }
    b.groups = int(f.group_labels.size());
    return f;
}

} // namespace cbf::cli
