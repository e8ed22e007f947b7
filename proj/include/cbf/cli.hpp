#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbf/consistency.hpp"
#include "cbf/error.hpp"
#include "cbf/evidence.hpp"
#include "cbf/missing.hpp"
#include "cbf/store.hpp"

namespace cbf::cli {

/// Header plus cells; NA and empty cells are kept as empty strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name (UnknownColumn).
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in, const std::string& source = "input");
CsvTable read_csv_file(const std::filesystem::path& path);

struct HypothesisSpec {
    std::string name;
    std::string constraint;
};

struct ImputationConfig {
    ImputeOptions options;
    /// Directory of externally imputed CSV files plus mask.csv.
    std::optional<std::filesystem::path> external_dir;
};

struct SimulationConfig {
    TruthSpec truth;
    ConsistencyOptions options;
    std::optional<std::filesystem::path> csv;
    std::optional<std::filesystem::path> svg;
};

struct AnalysisConfig {
    std::optional<std::filesystem::path> data;
    std::vector<std::string> outcomes;
    std::string group;
    std::vector<std::string> covariates;
    /// Explicit group order; otherwise first-seen order in the data.
    std::vector<std::string> groups;
    std::vector<HypothesisSpec> hypotheses;
    std::vector<double> prior_probs;
    McConfig mc;
    std::string format = "table";
    std::optional<std::filesystem::path> store;
    ImputationConfig imputation;
    std::optional<SimulationConfig> simulation;
};

/// Parses the JSON configuration; relative paths resolve against `base`.
AnalysisConfig parse_config(const std::string& json_text, const std::filesystem::path& base = {});
AnalysisConfig load_config(const std::filesystem::path& path);

/// Checks the invariants shared by every command (InvalidConfig).
void validate(const AnalysisConfig& cfg);

/// Data frame converted to a batch. Missing outcome cells become NaN when
/// `allow_missing`, otherwise they are an error (InvalidBatch).
struct Frame {
    DataBatch batch;
    std::vector<std::string> group_labels;
};

/// `known_groups` fixes the label order (unlisted labels are UnknownGroup);
/// when empty, labels are numbered in first-seen order.
Frame to_frame(const CsvTable& table, const AnalysisConfig& cfg, const std::vector<std::string>& known_groups,
               bool allow_missing);

StoreDescriptor descriptor_of(const AnalysisConfig& cfg, const std::vector<std::string>& group_labels);
ParameterTable parameter_table(const StoreDescriptor& d);
std::vector<ConstrainedModel> parse_models(const AnalysisConfig& cfg, const ParameterTable& table);

struct RenderContext {
    std::vector<std::string> group_labels;
    const std::vector<QuantitySpread>* between_sd = nullptr;
    int imputations = 0;
};

std::string render_json(const EvidenceReport& r, const RenderContext& ctx);
std::string render_table(const EvidenceReport& r, const RenderContext& ctx);

/// Inverse of render_json (the JSON report is canonical; tables are a view).
struct ParsedReport {
    EvidenceReport report;
    std::vector<std::string> group_labels;
    std::vector<QuantitySpread> between_sd;
    int imputations = 0;
};
ParsedReport parse_report_json(const std::string& text);

std::string render_consistency_csv(const std::vector<ConsistencyRow>& rows);
std::string render_consistency_svg(const std::vector<ConsistencyRow>& rows, const std::string& title);

/// Exit code for an error: 2 input or configuration, 3 numerical, 1 other.
int exit_code(Errc code) noexcept;

/// Entry point behind the `cbf` executable.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace cbf::cli
