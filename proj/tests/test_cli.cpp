#include "csd/cli.hpp"
#include "csd/design_io.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "csdet");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = csd::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / ("csdet_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string write_config(const std::string& name, const json& doc) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << doc.dump(2);
    return p.string();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

json base_simulation() {
    return json::parse(R"({
      "model": {"type": "structured", "N": 10, "rho2_spec": [5, 2, 1], "sigma_02": 1.0,
                "snr_db_grid": [-5, 0, 5]},
      "design": {"kind": "max_uncorrelated", "M1": 2, "M2": 2},
      "detector": {"Nb": 4, "pfa": [0.05, 0.1],
                   "gamma_grid": {"from": 0.2, "to": 5, "count": 12, "scale": "log"}},
      "sim": {"trials": 300, "master_seed": 9, "h_regeneration": "fixed"}
    })");
}

}  // namespace

TEST_CASE("design for a diagonal matrix matches the golden file") {
    const Run r = run({"design", "--preset", "design-diagonal", "--preset-dir", CSD_PRESET_DIR_FOR_TESTS});
    REQUIRE(r.code == 0);
    std::ifstream in(std::string(CSD_TEST_DATA_DIR) + "/design_diag.json");
    std::stringstream golden;
    golden << in.rdbuf();
    const json got = json::parse(r.out);
    const json want = json::parse(golden.str());
    CHECK(got["kind"] == want["kind"]);
    CHECK(got["M1"] == want["M1"]);
    CHECK(got["N"] == want["N"]);
    for (const char* key : {"phi_s", "phi_o"}) {
        REQUIRE(got[key].size() == want[key].size());
        for (std::size_t i = 0; i < want[key].size(); ++i) {
            CHECK(std::abs(got[key][i].get<double>() - want[key][i].get<double>()) <= 1e-15);
        }
    }
}

TEST_CASE("design output parses back to the same design") {
    const std::string cfg = write_config("random_design.json", json::parse(R"({
      "model": {"type": "random", "N": 9, "K": 3, "sigma_02": 1.0},
      "design": {"kind": "fully_correlated", "M1": 3, "M2": 2},
      "sim": {"master_seed": 4}
    })"));
    const Run a = run({"design", "--config", cfg});
    REQUIRE(a.code == 0);
    const csd::MeasurementDesign d = csd::parse_design(a.out);
    CHECK(d.m1() == 3);
    CHECK(d.m2() == 2);
    CHECK(csd::dump_design(d) + "\n" == a.out);
}

TEST_CASE("missing required field exits 2 and names it") {
    json doc = base_simulation();
    doc["design"].erase("M1");
    const Run r = run({"simulate", "--config", write_config("no_m1.json", doc)});
    CHECK(r.code == 2);
    CHECK(r.err.find("design.M1") != std::string::npos);
}

TEST_CASE("malformed JSON exits 2") {
    const fs::path p = scratch_dir() / "broken.json";
    std::ofstream(p) << "{\"model\": {\"type\": ";
    const Run r = run({"theory", "--config", p.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("invalid JSON") != std::string::npos);
}

TEST_CASE("bad values and unknown flags exit 2") {
    json doc = base_simulation();
    doc["design"]["M1"] = 9;
    Run r = run({"simulate", "--config", write_config("too_big.json", doc)});
    CHECK(r.code == 2);
    CHECK(r.err.find("exceeds N") != std::string::npos);
    CHECK(run({"simulate", "--bogus"}).code == 2);
    CHECK(run({"simulate", "--config", "/nonexistent/config.json"}).code == 2);
    doc = base_simulation();
    doc["detector"]["pfa"] = json::array({1.5});
    CHECK(run({"simulate", "--config", write_config("bad_pfa.json", doc)}).code == 2);
}

TEST_CASE("rank-deficient H exits 3") {
    const std::string cfg = write_config("rank.json", json::parse(R"({
      "model": {"type": "matrix", "sigma_02": 1.0, "H": [[1, 1], [1, 1], [1, 1]], "snr_db_grid": [0]},
      "design": {"kind": "max_uncorrelated", "M1": 1, "M2": 1},
      "detector": {"Nb": 2, "pfa": 0.1}
    })"));
    const Run r = run({"theory", "--config", cfg});
    CHECK(r.code == 3);
    CHECK(r.err.find("rank") != std::string::npos);
}

TEST_CASE("theory table with zero signal variance reports Pd = Pfa") {
    const std::string cfg = write_config("zero_signal.json", json::parse(R"({
      "model": {"type": "structured", "N": 6, "rho2_spec": [4, 1], "sigma_02": 2.0,
                "sigma_x2": [0.0, 1.0]},
      "design": {"kind": "max_uncorrelated", "M1": 1, "M2": 1},
      "detector": {"Nb": 3, "pfa": [0.01, 0.2]}
    })"));
    const Run r = run({"theory", "--config", cfg});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "snr_db,pfa,gamma,pd_lb,pd_ub,pd_exact,eta_lb,eta_ub");
    for (int i = 1; i <= 2; ++i) {
        const auto f = fields(rows[i]);
        CHECK(f[0] == "-inf");
        CHECK(std::stod(f[3]) == doctest::Approx(std::stod(f[1])).epsilon(1e-12));
        CHECK(std::stod(f[4]) == doctest::Approx(std::stod(f[1])).epsilon(1e-12));
    }
}

TEST_CASE("compensating device budget reproduces the precise rows") {
    const Run r = run({"theory", "--preset", "imprecise-compensation", "--preset-dir",
                       CSD_PRESET_DIR_FOR_TESTS});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() > 1);
    CHECK(rows[0].rfind("series,", 0) == 0);
    std::vector<std::vector<std::string>> precise;
    std::vector<std::vector<std::string>> l3;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        auto f = fields(rows[i]);
        const std::string name = f[0];
        f.erase(f.begin());
        if (name == "precise") precise.push_back(f);
        if (name == "L=3") l3.push_back(f);
    }
    REQUIRE(!precise.empty());
    REQUIRE(precise.size() == l3.size());
    for (std::size_t i = 0; i < precise.size(); ++i) {
        for (int c : {3, 4}) {
            CHECK(std::abs(std::stod(precise[i][c]) - std::stod(l3[i][c])) <= 1e-12);
        }
    }
}

TEST_CASE("simulate output is byte identical across reruns and thread counts") {
    const std::string cfg = write_config("sim.json", base_simulation());
    const Run a = run({"simulate", "--config", cfg, "--threads", "1"});
    const Run b = run({"simulate", "--config", cfg, "--threads", "1"});
    const Run c = run({"simulate", "--config", cfg, "--threads", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    const auto rows = lines(a.out);
    CHECK(rows[0] ==
          "snr_db,pfa_target,pfa_hat,pd_hat,pd_ci_lo,pd_ci_hi,pd_lb_theory,pd_ub_theory,trials,seed");
    CHECK(rows.size() == 1 + 3 * 2);
    const Run reseeded = run({"simulate", "--config", cfg, "--seed", "10"});
    CHECK(reseeded.out != a.out);
    const Run fewer = run({"simulate", "--config", cfg, "--trials", "50"});
    CHECK(fields(lines(fewer.out)[1])[8] == "50");
}

TEST_CASE("--out writes the same bytes as stdout") {
    const std::string cfg = write_config("out.json", base_simulation());
    const fs::path target = scratch_dir() / "table.csv";
    const Run to_file = run({"theory", "--config", cfg, "--out", target.string()});
    REQUIRE(to_file.code == 0);
    CHECK(to_file.out.empty());
    std::ifstream in(target);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str() == run({"theory", "--config", cfg}).out);
}

TEST_CASE("roc output") {
    const std::string cfg = write_config("roc.json", [] {
        json doc = base_simulation();
        doc["model"]["snr_db_grid"] = json::array({0});
        return doc;
    }());
    const Run r = run({"roc", "--config", cfg});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 13);
    CHECK(rows[0].rfind("gamma,pfa_target,pfa_hat,pd_hat,", 0) == 0);
    double previous_pd = 2.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double pd = std::stod(fields(rows[i])[3]);
        CHECK(pd <= previous_pd);
        previous_pd = pd;
    }
    json doc = base_simulation();
    CHECK(run({"roc", "--config", write_config("roc_many.json", doc)}).code == 2);
}

TEST_CASE("json format carries the same records") {
    const std::string cfg = write_config("fmt.json", base_simulation());
    const Run r = run({"theory", "--config", cfg, "--format", "json"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    REQUIRE(doc.is_array());
    CHECK(doc.size() == 6);
    CHECK(doc[0].contains("pd_lb"));
    CHECK(run({"theory", "--config", cfg, "--format", "xml"}).code == 2);
}

TEST_CASE("series and full-scale settings") {
    json doc = base_simulation();
    doc["series"] = json::parse(R"([
      {"name": "split, 1+3", "overrides": {"design": {"M1": 1, "M2": 3}}},
      {"name": "fc", "overrides": {"design": {"kind": "fully_correlated"}}}
    ])");
    doc["full_scale"] = json::parse(R"({"sim": {"trials": 77}})");
    const std::string cfg = write_config("series.json", doc);
    const Run r = run({"simulate", "--config", cfg, "--trials", "40"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    CHECK(rows.size() == 1 + 2 * 6);
    CHECK(rows[1].rfind("\"split, 1+3\",", 0) == 0);
    CHECK(fields(rows[1])[0] == "split, 1+3");
    CHECK(fields(rows.back())[0] == "fc");
    CHECK(fields(rows[1])[9] == "40");
    const Run full = run({"simulate", "--config", cfg, "--full-scale"});
    REQUIRE(full.code == 0);
    CHECK(fields(lines(full.out)[1])[9] == "77");
}

TEST_CASE("csv field formatting") {
    using csd::cli::csv_number;
    using csd::cli::csv_text;
    CHECK(csv_number(0.1) == "0.10000000000000001");
    CHECK(csv_number(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(csv_number(std::nan("")) == "nan");
    CHECK(csv_text("plain") == "plain");
    CHECK(csv_text("a,b") == "\"a,b\"");
    CHECK(csv_text("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("every preset validates") {
    const Run r = run({"presets", "--preset-dir", CSD_PRESET_DIR_FOR_TESTS});
    CHECK(r.code == 0);
    const auto rows = lines(r.out);
    CHECK(rows.size() >= 13);
}
