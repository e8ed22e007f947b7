#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbf/cli.hpp"
#include "support/check.hpp"

using namespace cbf;
using namespace cbf::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "cbf-cli-XXXXXX").string();
        path = ::mkdtemp(tmpl.data());
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

struct Outcome {
    int code;
    std::string out, err;
};

Outcome cbf_run(std::vector<std::string> args) {
    args.insert(args.begin(), "cbf");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

const fs::path kMoninCsv = fs::path(CBF_DATA_DIR) / "monin.csv";

std::string monin_config(const std::string& extra = "", const std::string& hypotheses = "") {
    const std::string h = hypotheses.empty()
                              ? R"([{"name": "M1", "constraint": "mu1 = mu2 = mu3"},
                                   {"name": "M2", "constraint": "mu2 > mu1 > mu3"},
                                   {"name": "M3", "constraint": "complement"}])"
                              : hypotheses;
    return R"({"data": ")" + kMoninCsv.string() + R"(", "outcomes": ["interest"], "group": "condition",
               "hypotheses": )" + h + R"(, "monte_carlo": {"draws": 2000, "seed": 5})" + extra + "}";
}

/// Reads the rows (header excluded) of a CSV file.
std::vector<std::string> csv_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string l;
    std::getline(in, l);
    while (std::getline(in, l)) lines.push_back(l);
    return lines;
}

void check_same_models(const ParsedReport& a, const ParsedReport& b, double eps) {
    REQUIRE(a.report.models.size() == b.report.models.size());
    for (std::size_t i = 0; i < a.report.models.size(); ++i) {
        CHECK(std::abs(a.report.models[i].log_bf - b.report.models[i].log_bf) <= eps);
        CHECK(std::abs(a.report.models[i].posterior_prob - b.report.models[i].posterior_prob) <= eps);
    }
}

} // namespace

TEST_CASE("csv reader") {
    std::istringstream in("a,b,\"c,d\"\n1, NA ,\"x \"\"y\"\"\"\n\n2,,3\n");
    const CsvTable t = read_csv(in);
    CHECK(t.header == std::vector<std::string>{"a", "b", "c,d"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "NA");
    CHECK(t.rows[0][2] == "x \"y\"");
    CHECK(t.rows[1][1].empty());
    CHECK(t.column("c,d") == 2);
    CHECK_ERRC(t.column("e"), Errc::UnknownColumn);
    std::istringstream ragged("a,b\n1\n");
    CHECK_ERRC(read_csv(ragged), Errc::InvalidBatch);
}

TEST_CASE("configuration parsing") {
    const AnalysisConfig c = parse_config(monin_config(R"(, "format": "json", "store": "s.cbf")"), "/base");
    CHECK(c.outcomes == std::vector<std::string>{"interest"});
    CHECK(c.hypotheses.size() == 3);
    CHECK(c.mc.draws == 2000);
    CHECK(c.format == "json");
    CHECK(*c.store == fs::path("/base/s.cbf"));
    CHECK_ERRC(parse_config(monin_config(R"(, "colour": 1)")), Errc::InvalidConfig);
    CHECK_ERRC(parse_config("{not json"), Errc::InvalidConfig);
    CHECK_ERRC(validate(parse_config(monin_config(R"(, "prior_probabilities": [0.5, 0.5, 0.5])"))),
               Errc::InvalidConfig);
    CHECK_ERRC(validate(parse_config(monin_config("", "[]"))), Errc::InvalidConfig);
}

TEST_CASE("analyze monin") {
    TempDir dir;
    const auto cfg = dir.write("m.json", monin_config());
    const auto table = cbf_run({"analyze", "--config", cfg.string()});
    REQUIRE(table.code == 0);
    CHECK(table.out.find("M2") != std::string::npos);
    CHECK(table.out.find("B_tu") != std::string::npos);

    const auto j1 = cbf_run({"analyze", "--config", cfg.string(), "--format", "json"});
    const auto j2 = cbf_run({"analyze", "--config", cfg.string(), "--format", "json", "--threads", "3"});
    REQUIRE(j1.code == 0);
    CHECK(j1.out == j2.out);
    const ParsedReport parsed = parse_report_json(j1.out);
    CHECK(parsed.report.models[1].posterior_prob == doctest::Approx(0.96).epsilon(0.01));
    CHECK(parsed.group_labels == std::vector<std::string>{"obedient", "affirmation", "rebel"});
    // the table is a view of the canonical JSON
    CHECK(render_table(parsed.report, {parsed.group_labels}) == table.out);
    CHECK(render_json(parsed.report, {parsed.group_labels}) == j1.out);

    const auto other = cbf_run({"analyze", "--config", cfg.string(), "--format", "json", "--seed", "6"});
    CHECK(other.out != j1.out);
}

TEST_CASE("input errors exit with code 2") {
    TempDir dir;
    auto bad_col = dir.write("c.json", monin_config());
    {
        std::string text = monin_config();
        text.replace(text.find("\"interest\""), 10, "\"nope\"");
        bad_col = dir.write("c.json", text);
    }
    const auto r = cbf_run({"analyze", "--config", bad_col.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("UnknownColumn") != std::string::npos);
    CHECK(r.err.rfind("error [", 0) == 0);

    const auto only = dir.write("o.json", monin_config("", R"([{"name": "C", "constraint": "complement"}])"));
    CHECK(cbf_run({"analyze", "--config", only.string()}).code == 2);
    const auto syntax = dir.write("s.json", monin_config("", R"([{"name": "C", "constraint": "mu1 >= mu2"}])"));
    const auto rs = cbf_run({"analyze", "--config", syntax.string()});
    CHECK(rs.code == 2);
    CHECK(rs.err.find("SyntaxError") != std::string::npos);

    CHECK(cbf_run({}).code == 2);
    CHECK(cbf_run({"analyze"}).code == 2);
    CHECK(cbf_run({"analyze", "--config", bad_col.string(), "--format", "xml"}).code == 2);
    CHECK(cbf_run({"analyze", "--config", (dir.path / "none.json").string()}).code != 0);
    CHECK(cbf_run({"analyze", "--config", only.string(), "--draws", "10"}).code == 2);
    CHECK(cbf_run({"--help"}).code == 0);
}

TEST_CASE("thread count from the environment") {
    TempDir dir;
    const auto cfg = dir.write("m.json", monin_config(R"(, "format": "json")"));
    const auto base = cbf_run({"analyze", "--config", cfg.string()});
    ::setenv("CBF_THREADS", "3", 1);
    const auto env = cbf_run({"analyze", "--config", cfg.string()});
    ::setenv("CBF_THREADS", "many", 1);
    const auto bad = cbf_run({"analyze", "--config", cfg.string()});
    const auto flag = cbf_run({"analyze", "--config", cfg.string(), "--threads", "2"});
    ::unsetenv("CBF_THREADS");
    CHECK(env.code == 0);
    CHECK(env.out == base.out);
    CHECK(bad.code == 2);
    CHECK(flag.code == 0);
}

TEST_CASE("store workflow") {
    TempDir dir;
    const auto cfg = dir.write("m.json", monin_config(R"(, "format": "json")"));
    const std::string store = (dir.path / "m.cbf").string();

    const auto first = cbf_run({"analyze", "--config", cfg.string(), "--store", store});
    REQUIRE(first.code == 0);
    REQUIRE(fs::exists(store));
    CHECK_FALSE(fs::exists(store + ".lock"));

    // analysis from the store alone
    std::string text = monin_config(R"(, "format": "json")");
    text.replace(text.find("\"data\""), std::string("\"data\": \"" + kMoninCsv.string() + "\",").size(), "");
    const auto nodata = dir.write("n.json", text);
    const auto on_store = cbf_run({"analyze", "--config", nodata.string(), "--store", store});
    REQUIRE(on_store.code == 0);
    CHECK(on_store.out == first.out);

    const auto empty = dir.write("empty.csv", "condition,interest\n");
    const auto up = cbf_run({"update", "--config", nodata.string(), "--store", store, "--data", empty.string()});
    REQUIRE(up.code == 0);
    CHECK(up.out == on_store.out);

    // a frame that does not match the store
    std::string two = text;
    two.replace(two.find("[\"interest\"]"), 12, "[\"interest\", \"interest2\"]");
    const auto mismatch = dir.write("two.json", two);
    const auto bad = cbf_run({"analyze", "--config", mismatch.string(), "--store", store});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("SchemaMismatch") != std::string::npos);

    const auto stranger = dir.write("x.csv", "condition,interest\nmartian,1.0\n");
    const auto unknown = cbf_run({"update", "--config", nodata.string(), "--store", store, "--data", stranger.string()});
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("UnknownGroup") != std::string::npos);

    std::ofstream(store + ".lock") << "999999999\n";
    const auto locked = cbf_run({"update", "--config", nodata.string(), "--store", store, "--data", empty.string()});
    CHECK(locked.code == 1);
    CHECK(locked.err.find("StaleLock") != std::string::npos);
}

TEST_CASE("two-step update reproduces the one-shot analysis") {
    TempDir dir;
    std::ifstream in(kMoninCsv);
    std::string header, line;
    std::getline(in, header);
    std::string a = header + "\n", b = header + "\n";
    for (int i = 0; std::getline(in, line); ++i) (i % 3 ? a : b) += line + "\n";
    const auto part_a = dir.write("a.csv", a);
    const auto part_b = dir.write("b.csv", b);
    std::string text = monin_config(R"(, "format": "json", "groups": ["obedient", "affirmation", "rebel"])");
    const auto cfg = dir.write("m.json", text);
    const std::string store = (dir.path / "m.cbf").string();
    REQUIRE(cbf_run({"update", "--config", cfg.string(), "--store", store, "--data", part_a.string()}).code == 0);
    const auto two = cbf_run({"update", "--config", cfg.string(), "--store", store, "--data", part_b.string()});
    REQUIRE(two.code == 0);
    const auto one = cbf_run({"analyze", "--config", cfg.string()});
    check_same_models(parse_report_json(two.out), parse_report_json(one.out), 1e-12);
}

TEST_CASE("impute command") {
    TempDir dir;
    const auto cfg = dir.write("m.json", monin_config(R"(, "format": "json", "imputation": {"imputations": 3})"));
    const auto imp = cbf_run({"impute", "--config", cfg.string()});
    const auto ana = cbf_run({"analyze", "--config", cfg.string()});
    REQUIRE(imp.code == 0);
    const auto pi = parse_report_json(imp.out);
    check_same_models(pi, parse_report_json(ana.out), 0.0);
    CHECK(pi.imputations == 3);

    // external imputations: two completed copies of a file with two gaps
    std::ifstream in(kMoninCsv);
    std::string header, line, holes, full, mask = "interest\n";
    std::getline(in, header);
    holes = full = header + "\n";
    for (int i = 0; std::getline(in, line); ++i) {
        full += line + "\n";
        const bool gap = i == 3 || i == 40;
        holes += gap ? line.substr(0, line.find(',')) + ",NA\n" : line + "\n";
        mask += gap ? "0\n" : "1\n";
    }
    const auto holed = dir.write("holes.csv", holes);
    fs::create_directory(dir.path / "ext");
    std::ofstream(dir.path / "ext" / "imp1.csv") << full;
    std::ofstream(dir.path / "ext" / "imp2.csv") << full;
    std::ofstream(dir.path / "ext" / "mask.csv") << mask;
    const auto ext = dir.write("e.json", monin_config(R"(, "format": "json", "imputation": {"external_dir": "ext"})"));
    const auto re = cbf_run({"impute", "--config", ext.string(), "--data", holed.string()});
    REQUIRE(re.code == 0);
    check_same_models(parse_report_json(re.out), parse_report_json(ana.out), 0.0);

    std::string wrong = mask;
    wrong[wrong.find('0')] = '1';
    std::ofstream(dir.path / "ext" / "mask.csv") << wrong;
    const auto bad = cbf_run({"impute", "--config", ext.string(), "--data", holed.string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("MaskMismatch") != std::string::npos);

    const auto native = cbf_run({"impute", "--config", cfg.string(), "--data", holed.string()});
    REQUIRE(native.code == 0);
    CHECK(parse_report_json(native.out).between_sd.size() == 3);
}

TEST_CASE("simulate command") {
    TempDir dir;
    const std::string sim = R"(, "simulation": {
        "truth": {"theta": [[0], [1], [2]], "sigma": [[1]], "proportions": [0.5, 0.25, 0.25]},
        "n_grid": [30, 60], "replications": 2, "target": "M2", "csv": "out.csv", "svg": "out.svg"})";
    const std::string hyps = R"([{"name": "M2", "constraint": "mu3 > mu2 > mu1"},
                                 {"name": "M3", "constraint": "complement"}])";
    const auto cfg = dir.write("s.json", monin_config(sim, hyps));
    const auto a = cbf_run({"simulate", "--config", cfg.string(), "--draws", "500"});
    const auto b = cbf_run({"simulate", "--config", cfg.string(), "--draws", "500"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.rfind("n,", 0) == 0);
    CHECK(csv_lines(dir.path / "out.csv").size() == 2);
    std::ifstream svg(dir.path / "out.svg");
    std::string first;
    std::getline(svg, first);
    CHECK(first.find("<svg") != std::string::npos);

    std::string zero = monin_config(sim, hyps);
    zero.replace(zero.find("\"replications\": 2"), 17, "\"replications\": 0");
    const auto bad = dir.write("z.json", zero);
    CHECK(cbf_run({"simulate", "--config", bad.string()}).code == 2);
}

TEST_CASE("exit codes by category") {
    CHECK(exit_code(Errc::SyntaxError) == 2);
    CHECK(exit_code(Errc::ChecksumMismatch) == 2);
    CHECK(exit_code(Errc::NotPositiveDefinite) == 3);
    CHECK(exit_code(Errc::FractionExceedsOne) == 3);
    CHECK(exit_code(Errc::Io) == 1);
}
