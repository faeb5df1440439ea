#include "csd/sim.hpp"

#include "csd/detect.hpp"
#include "csd/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace csd {

namespace {

std::uint64_t splitmix_finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Shared, read-only state for every trial of a run.
struct Context {
    const ExperimentSpec* spec = nullptr;
    DetectorKind kind = DetectorKind::max_uncorrelated;
    std::optional<SubspaceModel> fixed_model;
    std::optional<MeasurementDesign> fixed_design;
    std::optional<UnionModel> fixed_union;
};

}  // namespace

SubspaceModel realize_model(const ModelSpec& m, Rng& rng) {
    switch (m.type) {
        case ModelType::random: return gen_random_subspace(m.n, m.k, 0.0, m.sigma_02, rng);
        case ModelType::structured:
            return gen_structured_subspace(m.n, m.rho2_spec, 0.0, m.sigma_02, rng);
        case ModelType::matrix: return make_subspace_model(m.h, 0.0, m.sigma_02);
    }
    throw std::invalid_argument("sim: unknown model type");
}

MeasurementDesign design_for(const DesignSpec& d, const SubspaceModel& model) {
    if (d.known_variance) return design_known_variance(model, d.m1, d.strategy);
    if (d.strategy == Strategy::max_uncorrelated) return design_max_uncorrelated(model, d.m1, d.m2);
    return design_fully_correlated(model, d.m1, d.m2);
}

UnionModel realize_union(const ModelSpec& m, int q, Rng& rng) {
    const Matrix parent = random_gaussian_matrix(m.n, m.n, 1.0 / m.k, rng);
    std::vector<std::vector<int>> subsets;
    std::vector<int> pool(m.n);
    while (static_cast<int>(subsets.size()) < q) {
        for (int i = 0; i < m.n; ++i) pool[i] = i;
        for (int i = 0; i < m.k; ++i) {
            std::uniform_int_distribution<int> pick(i, m.n - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        std::vector<int> subset(pool.begin(), pool.begin() + m.k);
        std::sort(subset.begin(), subset.end());
        if (std::find(subsets.begin(), subsets.end(), subset) == subsets.end()) {
            subsets.push_back(std::move(subset));
        }
    }
    std::vector<Matrix> members;
    members.reserve(subsets.size());
    for (const auto& subset : subsets) members.push_back(parent(Eigen::all, subset));
    return make_uniform_union(std::move(members));
}

namespace {

Context make_context(const ExperimentSpec& spec) {
    Context ctx;
    ctx.spec = &spec;
    ctx.kind = detector_kind(spec.design.strategy, spec.design.known_variance);
    const bool fixed = spec.h_regeneration == HRegeneration::fixed ||
                       spec.model.type == ModelType::matrix;
    if (!fixed) return ctx;
    Rng rng(derive_model_seed(spec.master_seed));
    if (spec.union_spec) {
        ctx.fixed_union = realize_union(spec.model, spec.union_spec->q, rng);
        ctx.fixed_design = design_union(*ctx.fixed_union, spec.design.m1, spec.design.m2,
                                        spec.design.strategy)
                               .design;
    } else {
        ctx.fixed_model = realize_model(spec.model, rng);
        ctx.fixed_design = design_for(spec.design, *ctx.fixed_model);
    }
    return ctx;
}

double run_trial(const Context& ctx, std::size_t grid_index, std::uint32_t trial, Hypothesis hyp) {
    const ExperimentSpec& spec = *ctx.spec;
    Rng rng(derive_trial_seed(spec.master_seed, static_cast<std::uint32_t>(grid_index), trial, hyp));

    std::optional<SubspaceModel> local_model;
    std::optional<UnionModel> local_union;
    std::optional<MeasurementDesign> local_design;
    const Matrix* h = nullptr;
    const MeasurementDesign* design = nullptr;

    if (spec.union_spec) {
        const UnionModel* u = nullptr;
        if (ctx.fixed_union) {
            u = &*ctx.fixed_union;
            design = &*ctx.fixed_design;
        } else {
            local_union = realize_union(spec.model, spec.union_spec->q, rng);
            u = &*local_union;
            local_design =
                design_union(*u, spec.design.m1, spec.design.m2, spec.design.strategy).design;
            design = &*local_design;
        }
        std::uniform_int_distribution<int> active(0, u->q() - 1);
        h = &u->members[active(rng)];
    } else if (ctx.fixed_model) {
        h = &ctx.fixed_model->h;
        design = &*ctx.fixed_design;
    } else {
        local_model = realize_model(spec.model, rng);
        local_design = design_for(spec.design, *local_model);
        h = &local_model->h;
        design = &*local_design;
    }

    const double sx2 = spec.grid[grid_index].sigma_x2;
    const double s02 = spec.model.sigma_02;
    SampleBlock block;
    if (spec.imprecise) {
        const auto replicas = sample_replicates(*design, *h, sx2, s02, spec.nb, hyp,
                                                spec.imprecise->L, rng, spec.noise);
        block = apply_imprecision(replicas, *spec.imprecise, rng);
    } else {
        block = sample_block(*design, *h, sx2, s02, spec.nb, hyp, rng, spec.noise);
    }
    return statistic(ctx.kind, block, s02);
}

void batch_serial(const Context& ctx, std::size_t grid_index, Hypothesis hyp,
                  std::span<double> out) {
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = run_trial(ctx, grid_index, static_cast<std::uint32_t>(t), hyp);
    }
}

void batch_parallel(const Context& ctx, std::size_t grid_index, Hypothesis hyp,
                    std::span<double> out, int threads) {
    const long count = static_cast<long>(out.size());
    const int team = threads > 0 ? threads : omp_get_max_threads();
    std::exception_ptr failure;
#pragma omp parallel for schedule(static) num_threads(team)
    for (long t = 0; t < count; ++t) {
        try {
            out[t] = run_trial(ctx, grid_index, static_cast<std::uint32_t>(t), hyp);
        } catch (...) {
#pragma omp critical(csd_sim_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

// Rethrows a failure with the grid point prepended, keeping its category.
template <class Fn>
auto with_grid_context(std::size_t grid_index, const GridPoint& p, Fn&& fn) {
    const std::string where = "grid point " + std::to_string(grid_index) +
                              " (snr_db=" + std::to_string(p.snr_db) + "): ";
    try {
        return fn();
    } catch (const RankError& e) {
        throw RankError(where + e.what());
    } catch (const DimensionError& e) {
        throw DimensionError(where + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(where + e.what());
    } catch (const std::domain_error& e) {
        throw std::domain_error(where + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + e.what());
    }
}

std::vector<double> statistics_for(const Context& ctx, std::size_t grid_index, Hypothesis hyp,
                                   Execution exec) {
    const ExperimentSpec& spec = *ctx.spec;
    std::vector<double> out(static_cast<std::size_t>(spec.trials));
    with_grid_context(grid_index, spec.grid[grid_index], [&] {
        if (exec == Execution::serial) {
            batch_serial(ctx, grid_index, hyp, out);
        } else {
            batch_parallel(ctx, grid_index, hyp, out, spec.threads);
        }
        return 0;
    });
    return out;
}

long count_above(const std::vector<double>& stats, double gamma) {
    return static_cast<long>(
        std::count_if(stats.begin(), stats.end(), [gamma](double s) { return s > gamma; }));
}

double binomial_choose_capped(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > 1e12) return c;
    }
    return c;
}

}  // namespace

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint32_t grid_index,
                                std::uint32_t trial_index, Hypothesis hyp) {
    const std::uint64_t packed = (static_cast<std::uint64_t>(grid_index) << 32) ^
                                 (static_cast<std::uint64_t>(trial_index) << 1) ^
                                 (hyp == Hypothesis::h1 ? 1ULL : 0ULL);
    return splitmix_finalize(splitmix_finalize(master_seed) ^ packed);
}

std::uint64_t derive_model_seed(std::uint64_t master_seed) {
    return splitmix_finalize(splitmix_finalize(master_seed ^ 0x9e3779b97f4a7c15ULL) + 1);
}

std::pair<double, double> binomial_ci95(long successes, long trials) {
    if (trials < 1) throw std::invalid_argument("binomial_ci95: trials must be >= 1");
    const double p = static_cast<double>(successes) / trials;
    const double half = 1.96 * std::sqrt(p * (1.0 - p) / trials);
    return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

std::vector<GridPoint> snr_grid(std::span<const double> snr_db, double sigma_02) {
    std::vector<GridPoint> out;
    for (double db : snr_db) out.push_back({db, sigma_02 * std::pow(10.0, db / 10.0)});
    return out;
}

std::vector<GridPoint> sigma_grid(std::span<const double> sigma_x2, double sigma_02) {
    std::vector<GridPoint> out;
    for (double s : sigma_x2) {
        const double db = s > 0.0 ? 10.0 * std::log10(s / sigma_02)
                                  : -std::numeric_limits<double>::infinity();
        out.push_back({db, s});
    }
    return out;
}

void validate(const ExperimentSpec& spec) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("experiment: " + msg); };
    const ModelSpec& m = spec.model;
    if (!(m.sigma_02 > 0.0)) fail("model.sigma_02 must be > 0");
    if (m.type == ModelType::matrix) {
        if (m.h.rows() != m.n) fail("model.H must have N rows");
    }
    if (m.n < 1) fail("model.N must be >= 1");
    if (m.type == ModelType::random && (m.k < 1 || m.k > m.n)) fail("model.K must lie in [1, N]");
    if (m.type == ModelType::structured) {
        if (m.rho2_spec.empty()) fail("model.rho2_spec must be nonempty");
        if (static_cast<int>(m.rho2_spec.size()) > m.n) fail("model.rho2_spec is longer than N");
    }
    const DesignSpec& d = spec.design;
    if (d.m1 < 1) fail("design.M1 must be >= 1");
    if (d.known_variance && d.m2 != 0) fail("design.M2 must be 0 for known-variance detectors");
    if (!d.known_variance && d.m2 < 1) fail("design.M2 must be >= 1");
    if (d.strategy == Strategy::max_uncorrelated && d.m1 + d.m2 > m.n) {
        fail("design.M1 + design.M2 exceeds N");
    }
    if (spec.grid.empty()) fail("the SNR grid is empty");
    for (const GridPoint& p : spec.grid) {
        if (!(p.sigma_x2 >= 0.0) || !std::isfinite(p.sigma_x2)) {
            fail("grid values must be finite with sigma_x2 >= 0");
        }
    }
    if (spec.nb < 1) fail("detector.Nb must be >= 1");
    for (double pfa : spec.pfa_targets) {
        if (!(pfa > 0.0 && pfa < 1.0)) fail("detector.pfa must lie in (0, 1)");
    }
    if (spec.trials < 1 || spec.trials > (1 << 30)) fail("sim.trials must lie in [1, 2^30]");
    if (spec.imprecise) {
        validate(*spec.imprecise);
        if (d.strategy != Strategy::max_uncorrelated || d.known_variance || spec.union_spec) {
            fail("imprecise devices are supported for the max-uncorrelated detector only");
        }
    }
    if (spec.union_spec) {
        if (m.type != ModelType::random) fail("union experiments need model.type = random");
        if (d.known_variance) fail("union experiments use the unknown-variance detectors");
        if (spec.union_spec->q < 1) fail("union.Q must be >= 1");
        if (binomial_choose_capped(m.n, m.k) < spec.union_spec->q) {
            fail("union.Q exceeds the number of distinct K-column subsets");
        }
    }
}

std::optional<PerfConfig> experiment_perf_config(const ExperimentSpec& spec) {
    if (spec.union_spec) return std::nullopt;
    PerfConfig cfg{detector_kind(spec.design.strategy, spec.design.known_variance),
                   spec.design.m1, spec.design.m2, spec.nb, spec.imprecise};
    return cfg;
}

std::optional<Spectrum> experiment_spectrum(const ExperimentSpec& spec, std::size_t grid_index) {
    if (spec.union_spec) return std::nullopt;
    Spectrum s;
    s.sigma_x2 = spec.grid.at(grid_index).sigma_x2;
    s.sigma_02 = spec.model.sigma_02;
    if (spec.model.type == ModelType::structured) {
        s.rho2 = Vector::Zero(spec.model.n);
        for (std::size_t i = 0; i < spec.model.rho2_spec.size(); ++i) {
            s.rho2(static_cast<Eigen::Index>(i)) = spec.model.rho2_spec[i];
        }
    } else {
        // Random models use the realization a fixed-mode run would use.
        Rng rng(derive_model_seed(spec.master_seed));
        s.rho2 = realize_model(spec.model, rng).rho2;
    }
    return s;
}

std::vector<double> simulate_statistics(const ExperimentSpec& spec, std::size_t grid_index,
                                        Hypothesis hyp, Execution exec) {
    validate(spec);
    if (grid_index >= spec.grid.size()) throw std::out_of_range("simulate_statistics: grid index");
    const Context ctx = make_context(spec);
    return statistics_for(ctx, grid_index, hyp, exec);
}

TrialSummary run_experiment(const ExperimentSpec& spec, Execution exec) {
    validate(spec);
    if (spec.pfa_targets.empty()) throw std::invalid_argument("experiment: no pfa targets");
    const Context ctx = make_context(spec);
    const auto perf_cfg = experiment_perf_config(spec);
    TrialSummary summary;
    summary.spec = spec;
    for (std::size_t g = 0; g < spec.grid.size(); ++g) {
        const auto h0 = statistics_for(ctx, g, Hypothesis::h0, exec);
        const auto h1 = statistics_for(ctx, g, Hypothesis::h1, exec);
        const auto spectrum = experiment_spectrum(spec, g);
        for (double pfa : spec.pfa_targets) {
            GridRecord r;
            r.snr_db = spec.grid[g].snr_db;
            r.sigma_x2 = spec.grid[g].sigma_x2;
            r.pfa_target = pfa;
            r.gamma = threshold_for_pfa(ctx.kind, spec.design.m1, spec.design.m2, spec.nb, pfa);
            r.trials_h0 = r.trials_h1 = spec.trials;
            r.false_alarms = count_above(h0, r.gamma);
            r.detections_h1 = count_above(h1, r.gamma);
            r.pfa_hat = static_cast<double>(r.false_alarms) / r.trials_h0;
            r.pd_hat = static_cast<double>(r.detections_h1) / r.trials_h1;
            std::tie(r.pd_ci_lo, r.pd_ci_hi) = binomial_ci95(r.detections_h1, r.trials_h1);
            if (perf_cfg && spectrum) {
                r.theory = with_grid_context(g, spec.grid[g],
                                             [&] { return perf_at_pfa(*spectrum, *perf_cfg, pfa); });
            }
            summary.records.push_back(r);
        }
    }
    return summary;
}

RocCurve roc_curve(const ExperimentSpec& spec, std::span<const double> gamma_grid,
                   Execution exec) {
    validate(spec);
    if (spec.grid.size() != 1) throw std::invalid_argument("roc: the SNR grid must hold one point");
    if (gamma_grid.empty()) throw std::invalid_argument("roc: empty threshold grid");
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
        if (!(gamma_grid[i] >= 0.0) || !std::isfinite(gamma_grid[i]) ||
            (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1]))) {
            throw std::invalid_argument("roc: thresholds must be finite, >= 0, strictly increasing");
        }
    }
    const Context ctx = make_context(spec);
    const auto h0 = statistics_for(ctx, 0, Hypothesis::h0, exec);
    const auto h1 = statistics_for(ctx, 0, Hypothesis::h1, exec);
    const auto perf_cfg = experiment_perf_config(spec);
    const auto spectrum = experiment_spectrum(spec, 0);
    RocCurve curve;
    curve.point = spec.grid.front();
    for (double gamma : gamma_grid) {
        RocPoint p;
        p.gamma = gamma;
        p.pfa_theory = null_tail(ctx.kind, spec.design.m1, spec.design.m2, spec.nb, gamma);
        p.trials = spec.trials;
        p.false_alarms = count_above(h0, gamma);
        p.detections_h1 = count_above(h1, gamma);
        p.pfa_hat = static_cast<double>(p.false_alarms) / p.trials;
        p.pd_hat = static_cast<double>(p.detections_h1) / p.trials;
        std::tie(p.pd_ci_lo, p.pd_ci_hi) = binomial_ci95(p.detections_h1, p.trials);
        if (perf_cfg && spectrum) p.theory = perf_at_threshold(*spectrum, *perf_cfg, gamma);
        curve.points.push_back(p);
    }
    return curve;
}

}  // namespace csd
