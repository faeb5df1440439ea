#pragma once

#include "csd/sim.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace csd::cli {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3 };

/// Reads a JSON config file; parse failures become ConfigError with the
/// position reported by the parser.
nlohmann::json load_config(const std::filesystem::path& path);

/// One experiment per entry of the optional "series" array (each entry's
/// "overrides" merge-patched over the base document), or the base alone.
struct Series {
    std::string name;
    nlohmann::json config;
};
std::vector<Series> expand_series(const nlohmann::json& config);

/// Builds and validates the experiment described by a config document.
ExperimentSpec experiment_from_config(const nlohmann::json& config);

/// Thresholds from detector.gamma_grid: an explicit list or
/// {"from", "to", "count", "scale": "linear" | "log"}.
std::vector<double> gamma_grid_from_config(const nlohmann::json& config);

/// Builds the design described by a config document.
MeasurementDesign design_from_config(const nlohmann::json& config);

/// RFC-4180 field formatting: numbers with 17 significant digits, text
/// quoted when it contains a comma, quote or line break.
std::string csv_number(double value);
std::string csv_text(const std::string& value);

std::filesystem::path default_preset_dir();

/// Entry point shared by the csdet binary and the tests. Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace csd::cli
