#include "csd/cli.hpp"

#include "csd/design_io.hpp"
#include "csd/detect.hpp"
#include "csd/errors.hpp"
#include "csd/theory.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <variant>

namespace csd::cli {

using nlohmann::json;

namespace {

// A node of the config document together with its dotted path, so every
// validation failure can name the field it is about.
class Field {
public:
    explicit Field(const json& node, std::string path = "") : node_(&node), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& node() const { return *node_; }

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError((path_.empty() ? std::string("config") : path_) + ": " + message);
    }

    std::optional<Field> find(const std::string& key) const {
        if (!node_->is_object()) fail("expected an object");
        const auto it = node_->find(key);
        if (it == node_->end() || it->is_null()) return std::nullopt;
        return Field(*it, child_path(key));
    }

    Field at(const std::string& key) const {
        if (auto f = find(key)) return *f;
        Field(*node_, child_path(key)).fail("missing required field");
    }

    int as_int() const {
        if (!node_->is_number_integer()) fail("expected an integer");
        const auto v = node_->get<long long>();
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            fail("integer out of range");
        }
        return static_cast<int>(v);
    }

    std::uint64_t as_seed() const {
        if (node_->is_number_unsigned()) return node_->get<std::uint64_t>();
        if (node_->is_number_integer() && node_->get<long long>() >= 0) {
            return static_cast<std::uint64_t>(node_->get<long long>());
        }
        fail("expected a nonnegative integer");
    }

    double as_double() const {
        if (node_->is_string() && node_->get<std::string>() == "inf") {
            return std::numeric_limits<double>::infinity();
        }
        if (!node_->is_number()) fail("expected a number");
        return node_->get<double>();
    }

    std::string as_string() const {
        if (!node_->is_string()) fail("expected a string");
        return node_->get<std::string>();
    }

    // A number or a nonempty array of numbers.
    std::vector<double> as_double_list() const {
        if (node_->is_number()) return {node_->get<double>()};
        if (!node_->is_array() || node_->empty()) fail("expected a number or a nonempty array");
        std::vector<double> out;
        for (std::size_t i = 0; i < node_->size(); ++i) {
            out.push_back(Field((*node_)[i], path_ + "[" + std::to_string(i) + "]").as_double());
        }
        return out;
    }

    // Array of equally long rows.
    Matrix as_matrix() const {
        if (!node_->is_array() || node_->empty()) fail("expected an array of rows");
        const std::size_t rows = node_->size();
        const json& first = (*node_)[0];
        if (!first.is_array() || first.empty()) fail("expected an array of rows");
        const std::size_t cols = first.size();
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i) {
            const Field row((*node_)[i], path_ + "[" + std::to_string(i) + "]");
            if (!row.node().is_array() || row.node().size() != cols) {
                row.fail("rows must all have " + std::to_string(cols) + " entries");
            }
            for (std::size_t j = 0; j < cols; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    Field(row.node()[j], row.path() + "[" + std::to_string(j) + "]").as_double();
            }
        }
        return m;
    }

private:
    std::string child_path(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    const json* node_;
    std::string path_;
};

ModelSpec parse_model(const Field& root) {
    const Field model = root.at("model");
    ModelSpec m;
    const Field type = model.at("type");
    const std::string t = type.as_string();
    if (t == "random") {
        m.type = ModelType::random;
    } else if (t == "structured") {
        m.type = ModelType::structured;
    } else if (t == "matrix") {
        m.type = ModelType::matrix;
    } else {
        type.fail("expected one of random, structured, matrix");
    }
    m.sigma_02 = model.at("sigma_02").as_double();
    if (!(m.sigma_02 > 0.0)) model.at("sigma_02").fail("must be > 0");

    if (m.type == ModelType::matrix) {
        m.h = model.at("H").as_matrix();
        m.n = static_cast<int>(m.h.rows());
        m.k = static_cast<int>(m.h.cols());
        if (auto n = model.find("N"); n && n->as_int() != m.n) n->fail("does not match the rows of H");
        return m;
    }
    const Field n = model.at("N");
    m.n = n.as_int();
    if (m.n < 1) n.fail("must be >= 1");
    if (m.type == ModelType::random) {
        const Field k = model.at("K");
        m.k = k.as_int();
        if (m.k < 1 || m.k > m.n) k.fail("must lie in [1, N]");
    } else {
        const Field spec = model.at("rho2_spec");
        m.rho2_spec = spec.as_double_list();
        if (static_cast<int>(m.rho2_spec.size()) > m.n) spec.fail("longer than N");
        for (std::size_t i = 0; i < m.rho2_spec.size(); ++i) {
            if (!(m.rho2_spec[i] >= 0.0)) spec.fail("entries must be >= 0");
            if (i > 0 && m.rho2_spec[i] > m.rho2_spec[i - 1]) spec.fail("must be descending");
        }
        if (!(m.rho2_spec.front() > 0.0)) spec.fail("needs a positive leading entry");
        if (auto k = model.find("K")) m.k = k->as_int();
    }
    return m;
}

std::vector<GridPoint> parse_grid(const Field& root, double sigma_02) {
    const Field model = root.at("model");
    const auto snr = model.find("snr_db_grid");
    const auto sx = model.find("sigma_x2");
    if (snr && sx) model.fail("give either snr_db_grid or sigma_x2, not both");
    if (snr) {
        const auto values = snr->as_double_list();
        for (double v : values) {
            if (!std::isfinite(v)) snr->fail("values must be finite");
        }
        return snr_grid(values, sigma_02);
    }
    if (sx) {
        const auto values = sx->as_double_list();
        for (double v : values) {
            if (!(v >= 0.0) || !std::isfinite(v)) sx->fail("values must be finite and >= 0");
        }
        return sigma_grid(values, sigma_02);
    }
    model.fail("one of snr_db_grid or sigma_x2 is required");
}

struct ParsedKind {
    std::string name;
    DesignSpec spec;
};

ParsedKind parse_design_kind(const Field& root) {
    const Field design = root.at("design");
    const Field kind = design.at("kind");
    ParsedKind out;
    out.name = kind.as_string();
    DesignSpec& d = out.spec;
    if (out.name == "max_uncorrelated" || out.name == "known_var_max_unc") {
        d.strategy = Strategy::max_uncorrelated;
    } else if (out.name == "fully_correlated" || out.name == "known_var_fully_corr") {
        d.strategy = Strategy::fully_correlated;
    } else if (out.name == "interference" || out.name == "dictionary" || out.name == "union") {
        d.strategy = Strategy::max_uncorrelated;
        if (auto s = design.find("strategy")) {
            try {
                d.strategy = strategy_from_string(s->as_string());
            } catch (const std::invalid_argument&) {
                s->fail("expected max_uncorrelated or fully_correlated");
            }
        }
    } else {
        kind.fail("unknown design kind '" + out.name + "'");
    }
    d.known_variance = out.name.rfind("known_var", 0) == 0;
    const Field m1 = design.at("M1");
    d.m1 = m1.as_int();
    if (d.m1 < 1) m1.fail("must be >= 1");
    if (d.known_variance) {
        if (auto m2 = design.find("M2"); m2 && m2->as_int() != 0) {
            m2->fail("must be 0 for known-variance detectors");
        }
        d.m2 = 0;
    } else if (out.name == "dictionary" && !design.find("M2")) {
        d.m2 = 0;
        d.known_variance = true;
    } else {
        const Field m2 = design.at("M2");
        d.m2 = m2.as_int();
        if (d.m2 < (out.name == "dictionary" ? 0 : 1)) m2.fail("must be >= 1");
        if (out.name == "dictionary" && d.m2 == 0) d.known_variance = true;
    }
    return out;
}

std::uint64_t parse_seed(const Field& root) {
    if (auto sim = root.find("sim")) {
        if (auto seed = sim->find("master_seed")) return seed->as_seed();
    }
    return 0;
}

[[noreturn]] void rethrow_as_config_error(const std::exception& e) { throw ConfigError(e.what()); }

// Number of equally spaced (or log-spaced) thresholds.
std::vector<double> spaced_grid(const Field& f) {
    const double from = f.at("from").as_double();
    const double to = f.at("to").as_double();
    const Field count_field = f.at("count");
    const int count = count_field.as_int();
    if (count < 2) count_field.fail("must be >= 2");
    std::string scale = "linear";
    if (auto s = f.find("scale")) scale = s->as_string();
    if (scale != "linear" && scale != "log") f.at("scale").fail("expected linear or log");
    if (!(to > from)) f.fail("needs to > from");
    if (scale == "log" && !(from > 0.0)) f.at("from").fail("must be > 0 on a log scale");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double t = static_cast<double>(i) / (count - 1);
        out[i] = scale == "log" ? std::exp(std::log(from) + t * (std::log(to) - std::log(from)))
                                : from + t * (to - from);
    }
    return out;
}

// ----- tables -----

using Cell = std::variant<std::monostate, double, long, std::uint64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

Cell optional_cell(const std::optional<double>& v) {
    if (v) return *v;
    return std::monostate{};
}

std::string csv_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, double>) {
                return csv_number(v);
            } else if constexpr (std::is_same_v<T, std::string>) {
                return csv_text(v);
            } else {
                return std::to_string(v);
            }
        },
        c);
}

json json_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                if (std::isfinite(v)) return v;
                return csv_number(v);
            } else {
                return v;
            }
        },
        c);
}

std::string render(const Table& t, const std::string& format) {
    if (format == "json") {
        json rows = json::array();
        for (const auto& row : t.rows) {
            json obj = json::object();
            for (std::size_t i = 0; i < t.columns.size(); ++i) obj[t.columns[i]] = json_cell(row[i]);
            rows.push_back(std::move(obj));
        }
        return rows.dump(2) + "\n";
    }
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) out += ',';
        out += csv_text(t.columns[i]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += csv_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

// ----- commands -----

struct Options {
    std::string command;
    std::string config_path;
    std::string preset;
    std::string preset_dir;
    std::string out_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
    bool full_scale = false;
};

void apply_cli_overrides(json& config, const Options& opt) {
    if (opt.seed) config["sim"]["master_seed"] = *opt.seed;
    if (opt.trials) config["sim"]["trials"] = *opt.trials;
    if (opt.threads) config["sim"]["threads"] = *opt.threads;
}

std::vector<Series> series_for(const json& base, const Options& opt) {
    json config = base;
    if (opt.full_scale) {
        if (!config.contains("full_scale")) {
            throw ConfigError("full_scale: this config defines no full-scale settings");
        }
        config.merge_patch(config["full_scale"]);
    }
    auto series = expand_series(config);
    for (auto& s : series) apply_cli_overrides(s.config, opt);
    return series;
}

Table with_series_column(std::vector<std::pair<std::string, Table>> parts, bool named) {
    Table out;
    if (parts.empty()) return out;
    out.columns = parts.front().second.columns;
    if (named) out.columns.insert(out.columns.begin(), "series");
    for (auto& [name, table] : parts) {
        for (auto& row : table.rows) {
            if (named) row.insert(row.begin(), name);
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

Table theory_table(const json& config) {
    const ExperimentSpec spec = experiment_from_config(config);
    if (spec.pfa_targets.empty()) throw ConfigError("detector.pfa: missing required field");
    const auto cfg = experiment_perf_config(spec);
    if (!cfg) throw ConfigError("union: no closed-form performance is available");
    Table t;
    t.columns = {"snr_db", "pfa", "gamma", "pd_lb", "pd_ub", "pd_exact", "eta_lb", "eta_ub"};
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const Spectrum s = *experiment_spectrum(spec, g);
        for (double pfa : spec.pfa_targets) {
            const TheoreticalPerf p = perf_at_pfa(s, *cfg, pfa);
            t.rows.push_back({spec.grid[g].snr_db, pfa, p.gamma, p.pd_lb, p.pd_ub,
                              optional_cell(p.pd_exact), p.eta_lb, p.eta_ub});
        }
    }
    return t;
}

const std::vector<std::string> kEmpiricalColumns = {
    "pfa_target", "pfa_hat", "pd_hat", "pd_ci_lo", "pd_ci_hi",
    "pd_lb_theory", "pd_ub_theory", "trials", "seed"};

Table simulate_table(const json& config) {
    const ExperimentSpec spec = experiment_from_config(config);
    if (spec.pfa_targets.empty()) throw ConfigError("detector.pfa: missing required field");
    const TrialSummary summary = run_experiment(spec);
    Table t;
    t.columns = {"snr_db"};
    t.columns.insert(t.columns.end(), kEmpiricalColumns.begin(), kEmpiricalColumns.end());
    for (const GridRecord& r : summary.records) {
        Cell lb = std::monostate{};
        Cell ub = std::monostate{};
        if (r.theory) {
            lb = r.theory->pd_lb;
            ub = r.theory->pd_ub;
        }
        t.rows.push_back({r.snr_db, r.pfa_target, r.pfa_hat, r.pd_hat, r.pd_ci_lo, r.pd_ci_hi, lb,
                          ub, static_cast<long>(r.trials_h1), spec.master_seed});
    }
    return t;
}

Table roc_table(const json& config) {
    const ExperimentSpec spec = experiment_from_config(config);
    if (spec.grid.size() != 1) throw ConfigError("model: roc needs exactly one SNR value");
    const auto gammas = gamma_grid_from_config(config);
    const RocCurve curve = roc_curve(spec, gammas);
    Table t;
    t.columns = {"gamma"};
    t.columns.insert(t.columns.end(), kEmpiricalColumns.begin(), kEmpiricalColumns.end());
    for (const RocPoint& p : curve.points) {
        Cell lb = std::monostate{};
        Cell ub = std::monostate{};
        if (p.theory) {
            lb = p.theory->pd_lb;
            ub = p.theory->pd_ub;
        }
        t.rows.push_back({p.gamma, p.pfa_theory, p.pfa_hat, p.pd_hat, p.pd_ci_lo, p.pd_ci_hi, lb, ub,
                          p.trials, spec.master_seed});
    }
    return t;
}

const std::vector<std::string> kCommands = {"design", "theory", "simulate", "roc"};

void check_preset(const std::filesystem::path& path) {
    const json config = load_config(path);
    const Field root(config);
    const std::string command = root.at("command").as_string();
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
        root.at("command").fail("expected one of design, theory, simulate, roc");
    }
    root.at("description").as_string();
    std::vector<json> variants = {config};
    if (config.contains("full_scale")) {
        json full = config;
        full.merge_patch(config["full_scale"]);
        variants.push_back(full);
    }
    for (const json& variant : variants) {
        for (const Series& s : expand_series(variant)) {
            if (command == "design") {
                design_from_config(s.config);
                continue;
            }
            const ExperimentSpec spec = experiment_from_config(s.config);
            if (command == "roc") {
                gamma_grid_from_config(s.config);
                if (spec.grid.size() != 1) throw ConfigError("model: roc needs exactly one SNR value");
            } else if (spec.pfa_targets.empty()) {
                throw ConfigError("detector.pfa: missing required field");
            }
        }
    }
}

std::vector<std::filesystem::path> preset_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("--preset-dir: " + dir.string() + " is not a directory");
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

Table presets_table(const std::filesystem::path& dir) {
    Table t;
    t.columns = {"name", "command", "description"};
    for (const auto& file : preset_files(dir)) {
        try {
            check_preset(file);
        } catch (const ConfigError& e) {
            throw ConfigError(file.filename().string() + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(file.filename().string() + ": " + e.what());
        }
        const json config = load_config(file);
        t.rows.push_back({file.stem().string(), config["command"].get<std::string>(),
                          config["description"].get<std::string>()});
    }
    return t;
}

std::string run_command(const Options& opt) {
    const std::filesystem::path preset_dir =
        opt.preset_dir.empty() ? default_preset_dir() : std::filesystem::path(opt.preset_dir);
    if (opt.command == "presets") return render(presets_table(preset_dir), opt.format);

    std::filesystem::path path;
    if (!opt.preset.empty() && !opt.config_path.empty()) {
        throw ConfigError("--config: give either --config or --preset");
    }
    if (!opt.preset.empty()) {
        path = preset_dir / (opt.preset + ".json");
        if (!std::filesystem::exists(path)) throw ConfigError("--preset: no preset named " + opt.preset);
    } else if (!opt.config_path.empty()) {
        path = opt.config_path;
    } else {
        throw ConfigError("--config: missing required option");
    }
    const json base = load_config(path);
    const auto series = series_for(base, opt);

    if (opt.command == "design") {
        if (series.size() != 1) throw ConfigError("series: design takes a single configuration");
        if (opt.format != "json") throw ConfigError("--format: design output is JSON only");
        return dump_design(design_from_config(series.front().config)) + "\n";
    }
    std::vector<std::pair<std::string, Table>> parts;
    for (const Series& s : series) {
        if (opt.command == "theory") {
            parts.emplace_back(s.name, theory_table(s.config));
        } else if (opt.command == "simulate") {
            parts.emplace_back(s.name, simulate_table(s.config));
        } else {
            parts.emplace_back(s.name, roc_table(s.config));
        }
    }
    return render(with_series_column(std::move(parts), base.contains("series")), opt.format);
}

}  // namespace

// ----- public helpers -----

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
}

std::vector<Series> expand_series(const json& config) {
    if (!config.is_object()) throw ConfigError("config: expected a JSON object");
    if (!config.contains("series")) return {{"", config}};
    const Field list(config["series"], "series");
    if (!list.node().is_array() || list.node().empty()) list.fail("expected a nonempty array");
    json base = config;
    base.erase("series");
    base.erase("full_scale");
    std::vector<Series> out;
    for (std::size_t i = 0; i < list.node().size(); ++i) {
        const Field entry(list.node()[i], "series[" + std::to_string(i) + "]");
        Series s;
        s.name = entry.at("name").as_string();
        s.config = base;
        if (auto overrides = entry.find("overrides")) {
            if (!overrides->node().is_object()) overrides->fail("expected an object");
            s.config.merge_patch(overrides->node());
        }
        out.push_back(std::move(s));
    }
    return out;
}

ExperimentSpec experiment_from_config(const json& config) {
    const Field root(config);
    ExperimentSpec spec;
    spec.model = parse_model(root);
    spec.grid = parse_grid(root, spec.model.sigma_02);
    const ParsedKind kind = parse_design_kind(root);
    if (kind.name == "interference" || kind.name == "dictionary") {
        root.at("design").at("kind").fail("'" + kind.name + "' designs are only built by the design command");
    }
    spec.design = kind.spec;
    if (kind.name == "union" && !root.find("union")) root.at("union").fail("missing required field");

    const Field detector = root.at("detector");
    const Field nb = detector.at("Nb");
    spec.nb = nb.as_int();
    if (spec.nb < 1) nb.fail("must be >= 1");
    if (auto pfa = detector.find("pfa")) {
        spec.pfa_targets = pfa->as_double_list();
        for (double p : spec.pfa_targets) {
            if (!(p > 0.0 && p < 1.0)) pfa->fail("values must lie in (0, 1)");
        }
    }

    if (auto imp = root.find("imprecise")) {
        ImpreciseConfig cfg;
        cfg.delta = imp->at("delta").as_double();
        if (!(cfg.delta > 0.0)) imp->at("delta").fail("must be > 0");
        cfg.L = imp->at("L").as_int();
        if (cfg.L < 1) imp->at("L").fail("must be >= 1");
        spec.imprecise = cfg;
    }
    if (auto u = root.find("union")) {
        const Field q = u->at("Q");
        spec.union_spec = UnionSpec{q.as_int()};
        if (spec.union_spec->q < 1) q.fail("must be >= 1");
        if (auto pi = u->find("pi"); pi && pi->as_string() != "uniform") {
            pi->fail("only \"uniform\" is supported");
        }
    }
    if (auto sim = root.find("sim")) {
        if (auto trials = sim->find("trials")) {
            spec.trials = trials->as_int();
            if (spec.trials < 1) trials->fail("must be >= 1");
        }
        if (auto regen = sim->find("h_regeneration")) {
            const std::string r = regen->as_string();
            if (r == "per_trial") {
                spec.h_regeneration = HRegeneration::per_trial;
            } else if (r == "fixed") {
                spec.h_regeneration = HRegeneration::fixed;
            } else {
                regen->fail("expected per_trial or fixed");
            }
        }
        if (auto seed = sim->find("master_seed")) spec.master_seed = seed->as_seed();
        if (auto noise = sim->find("noise")) {
            const std::string n = noise->as_string();
            if (n == "projected") {
                spec.noise = NoiseModel::projected;
            } else if (n == "ambient") {
                spec.noise = NoiseModel::ambient;
            } else {
                noise->fail("expected projected or ambient");
            }
        }
        if (auto threads = sim->find("threads")) {
            spec.threads = threads->as_int();
            if (spec.threads < 0) threads->fail("must be >= 0");
        }
    }
    try {
        validate(spec);
    } catch (const std::invalid_argument& e) {
        rethrow_as_config_error(e);
    }
    return spec;
}

std::vector<double> gamma_grid_from_config(const json& config) {
    const Field grid = Field(config).at("detector").at("gamma_grid");
    std::vector<double> out =
        grid.node().is_object() ? spaced_grid(grid) : grid.as_double_list();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] >= 0.0) || !std::isfinite(out[i])) grid.fail("values must be finite and >= 0");
        if (i > 0 && !(out[i] > out[i - 1])) grid.fail("values must be strictly increasing");
    }
    return out;
}

MeasurementDesign design_from_config(const json& config) {
    const Field root(config);
    const ModelSpec model_spec = parse_model(root);
    const ParsedKind kind = parse_design_kind(root);
    const Field design = root.at("design");
    Rng rng(derive_model_seed(parse_seed(root)));
    try {
        if (auto u = root.find("union"); u || kind.name == "union") {
            if (!u) root.at("union").fail("missing required field");
            if (model_spec.type != ModelType::random) root.at("model").at("type").fail("union designs need a random model");
            const int q = u->at("Q").as_int();
            if (q < 1) u->at("Q").fail("must be >= 1");
            const UnionModel um = realize_union(model_spec, q, rng);
            return design_union(um, kind.spec.m1, kind.spec.m2, kind.spec.strategy).design;
        }
        const SubspaceModel model = realize_model(model_spec, rng);
        if (kind.name == "interference") {
            const Matrix g = design.at("G").as_matrix();
            if (g.rows() != model.n()) design.at("G").fail("must have N rows");
            return design_with_interference(model, g, kind.spec.m1, kind.spec.m2, kind.spec.strategy);
        }
        if (kind.name == "dictionary") {
            const Matrix q = design.at("psi").as_matrix();
            if (q.rows() != model.n()) design.at("psi").fail("must have N rows");
            const int m = kind.spec.m1 + kind.spec.m2;
            return design_from_dictionary(model, Dictionary::from_orthonormal(q, m), kind.spec.m1,
                                          kind.spec.m2, kind.spec.strategy);
        }
        if (!kind.spec.known_variance && kind.spec.strategy == Strategy::max_uncorrelated &&
            kind.spec.m1 + kind.spec.m2 > model.n()) {
            design.fail("M1 + M2 exceeds N");
        }
        return design_for(kind.spec, model);
    } catch (const RankError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        rethrow_as_config_error(e);
    }
}

std::string csv_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string csv_text(const std::string& value) {
    if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::filesystem::path default_preset_dir() {
#ifdef CSD_PRESET_DIR
    return CSD_PRESET_DIR;
#else
    return "presets";
#endif
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Compressive subspace signal detection: designs, theory and Monte Carlo."};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"design", "emit the measurement design as JSON"},
        {"theory", "tabulate closed-form Pfa/Pd over the grid"},
        {"simulate", "Monte Carlo Pd/Pfa over the SNR grid"},
        {"roc", "Monte Carlo ROC at one SNR over detector.gamma_grid"},
        {"presets", "list and validate the preset configs"},
    };
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config_path, "experiment config (JSON)");
        sub->add_option("--preset", opt.preset, "preset name, resolved in the preset directory");
        sub->add_option("--preset-dir", opt.preset_dir, "preset directory");
        sub->add_option("--seed", opt.seed, "master seed override");
        sub->add_option("--trials", opt.trials, "trials per hypothesis override")
            ->check(CLI::PositiveNumber);
        sub->add_option("--threads", opt.threads, "OpenMP threads (0: runtime default)")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--out", opt.out_path, "output file (default stdout)");
        sub->add_option("--format", opt.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_flag("--full-scale", opt.full_scale, "apply the config's full_scale settings");
        sub->callback([&opt, name = name] { opt.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    }
    if (opt.command == "design" && opt.format == "csv") {
        // CSV is meaningless for a matrix document; design is always JSON.
        opt.format = "json";
    }
    try {
        const std::string text = run_command(opt);
        if (opt.out_path.empty()) {
            out << text;
        } else {
            std::ofstream file(opt.out_path, std::ios::binary);
            if (!file) throw ConfigError("--out: cannot write " + opt.out_path);
            file << text;
        }
        return ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const RankError& e) {
        err << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << "\n";
        return numerical_error;
    }
}

}  // namespace csd::cli
