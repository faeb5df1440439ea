#pragma once

#include "csd/design.hpp"
#include "csd/model.hpp"
#include "csd/sampling.hpp"
#include "csd/theory.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace csd {

enum class ModelType { random, structured, matrix };
enum class HRegeneration { per_trial, fixed };
enum class Execution { serial, parallel };

struct ModelSpec {
    ModelType type = ModelType::structured;
    int n = 0;
    int k = 0;                     // random and union models
    std::vector<double> rho2_spec;  // structured: descending, zero-padded to N
    Matrix h;                      // matrix: used as given
    double sigma_02 = 1.0;
};

struct DesignSpec {
    Strategy strategy = Strategy::max_uncorrelated;
    bool known_variance = false;
    int m1 = 1;
    int m2 = 1;
};

/// Signal in one of Q subspaces drawn from an N x N Gaussian parent matrix;
/// members are Q distinct K-column subsets, the active one uniform.
struct UnionSpec {
    int q = 1;
};

struct GridPoint {
    double snr_db = 0.0;
    double sigma_x2 = 0.0;
};

/// sigma_x2 = sigma_02 10^(snr/10) for every entry.
std::vector<GridPoint> snr_grid(std::span<const double> snr_db, double sigma_02);
/// snr_db = 10 log10(sigma_x2 / sigma_02); -inf for sigma_x2 = 0.
std::vector<GridPoint> sigma_grid(std::span<const double> sigma_x2, double sigma_02);

struct ExperimentSpec {
    ModelSpec model;
    DesignSpec design;
    std::vector<GridPoint> grid;
    int nb = 1;
    std::vector<double> pfa_targets;
    std::optional<ImpreciseConfig> imprecise;  // max-uncorrelated only
    std::optional<UnionSpec> union_spec;
    int trials = 1000;  // per hypothesis
    HRegeneration h_regeneration = HRegeneration::per_trial;
    std::uint64_t master_seed = 0;
    NoiseModel noise = NoiseModel::projected;
    int threads = 0;  // 0: OpenMP default
};

/// One draw of the model: random and structured models consume `rng`, a
/// matrix model is used as given. sigma_x2 is left at 0.
SubspaceModel realize_model(const ModelSpec& m, Rng& rng);

/// One N x N Gaussian parent (entries of variance 1/K) and Q distinct
/// K-column subsets of it, uniformly weighted.
UnionModel realize_union(const ModelSpec& m, int q, Rng& rng);

/// The design a DesignSpec selects for a model.
MeasurementDesign design_for(const DesignSpec& d, const SubspaceModel& model);

/// Throws std::invalid_argument describing the first problem found.
void validate(const ExperimentSpec& spec);

struct GridRecord {
    double snr_db = 0.0;
    double sigma_x2 = 0.0;
    double pfa_target = 0.0;
    double gamma = 0.0;
    long detections_h1 = 0;
    long trials_h1 = 0;
    long false_alarms = 0;
    long trials_h0 = 0;
    double pd_hat = 0.0;
    double pfa_hat = 0.0;
    double pd_ci_lo = 0.0;
    double pd_ci_hi = 0.0;
    std::optional<TheoreticalPerf> theory;
};

struct TrialSummary {
    ExperimentSpec spec;
    std::vector<GridRecord> records;  // grid-major, pfa targets inner
};

struct RocPoint {
    double gamma = 0.0;
    double pfa_theory = 0.0;  // null tail at gamma
    long false_alarms = 0;
    long detections_h1 = 0;
    long trials = 0;
    double pfa_hat = 0.0;
    double pd_hat = 0.0;
    double pd_ci_lo = 0.0;
    double pd_ci_hi = 0.0;
    std::optional<TheoreticalPerf> theory;
};

struct RocCurve {
    GridPoint point;
    std::vector<RocPoint> points;
};

/// SplitMix64 finalizer applied to the master seed, xored with the packed
/// tuple (grid << 32 | trial << 1 | hypothesis) and finalized again. For a
/// fixed master seed the map is a bijection on tuples with grid, trial < 2^31.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint32_t grid_index,
                                std::uint32_t trial_index, Hypothesis hyp);

/// Seed of the stream that draws the fixed (or reference) model realization.
std::uint64_t derive_model_seed(std::uint64_t master_seed);

/// Normal-approximation 95% interval for a binomial proportion, clipped to [0, 1].
std::pair<double, double> binomial_ci95(long successes, long trials);

/// The statistic of every trial of one hypothesis at one grid point.
std::vector<double> simulate_statistics(const ExperimentSpec& spec, std::size_t grid_index,
                                        Hypothesis hyp, Execution exec = Execution::parallel);

/// Theory at a grid point, when a closed form exists for the configuration.
std::optional<PerfConfig> experiment_perf_config(const ExperimentSpec& spec);
std::optional<Spectrum> experiment_spectrum(const ExperimentSpec& spec, std::size_t grid_index);

TrialSummary run_experiment(const ExperimentSpec& spec, Execution exec = Execution::parallel);

/// One batch per hypothesis, thresholds swept over gamma_grid (strictly
/// increasing). The spec grid must hold exactly one point.
RocCurve roc_curve(const ExperimentSpec& spec, std::span<const double> gamma_grid,
                   Execution exec = Execution::parallel);

}  // namespace csd
