#include "csd/theory.hpp"

#include "csd/detect.hpp"
#include "csd/errors.hpp"
#include "csd/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace csd {

namespace {

constexpr double kExactTolerance = 1e-12;

void check_spectrum(const Spectrum& s) {
    if (s.n() < 1) throw DimensionError("theory: empty spectrum");
    if (!(s.sigma_x2 >= 0.0) || !(s.sigma_02 > 0.0)) {
        throw std::invalid_argument("theory: need sigma_x2 >= 0 and sigma_02 > 0");
    }
}

void check_config(const Spectrum& s, const PerfConfig& cfg) {
    check_spectrum(s);
    if (cfg.nb < 1) throw DimensionError("theory: Nb must be >= 1");
    if (cfg.m1 < 1) throw DimensionError("theory: M1 must be >= 1");
    const int n = s.n();
    switch (cfg.kind) {
        case DetectorKind::max_uncorrelated:
            if (cfg.m2 < 1 || cfg.m1 + cfg.m2 > n) {
                throw DimensionError("theory: split (" + std::to_string(cfg.m1) + ", " +
                                     std::to_string(cfg.m2) + ") does not fit N = " +
                                     std::to_string(n));
            }
            break;
        case DetectorKind::fully_correlated:
            if (cfg.m2 < 1 || n < 2) throw DimensionError("theory: need M2 >= 1 and N >= 2");
            break;
        case DetectorKind::known_var_max_unc:
            if (cfg.m2 != 0 || cfg.m1 > n) {
                throw DimensionError("theory: known-variance split must have M2 = 0, M1 <= N");
            }
            break;
        case DetectorKind::known_var_fully_corr:
            if (cfg.m2 != 0) throw DimensionError("theory: known-variance split must have M2 = 0");
            break;
    }
    if (cfg.imprecise) {
        validate(*cfg.imprecise);
        if (cfg.kind != DetectorKind::max_uncorrelated) {
            throw std::invalid_argument("theory: imprecise devices are modelled for the "
                                        "max-uncorrelated detector only");
        }
    }
}

TheoreticalPerf finish(const PerfConfig& cfg, double gamma, double pfa, double eta_lb,
                       double eta_ub) {
    TheoreticalPerf p;
    p.pfa = pfa;
    p.gamma = gamma;
    p.eta_lb = eta_lb;
    p.eta_ub = eta_ub;
    p.pd_lb = null_tail(cfg.kind, cfg.m1, cfg.m2, cfg.nb, eta_lb * gamma);
    p.pd_ub = null_tail(cfg.kind, cfg.m1, cfg.m2, cfg.nb, eta_ub * gamma);
    if (std::abs(p.pd_ub - p.pd_lb) <= kExactTolerance) p.pd_exact = p.pd_lb;
    return p;
}

}  // namespace

std::pair<double, double> shift_factors(const Spectrum& s, const PerfConfig& cfg) {
    check_config(s, cfg);
    const int n = s.n();
    const double s0 = s.sigma_02;
    const double sx = s.sigma_x2;
    switch (cfg.kind) {
        case DetectorKind::max_uncorrelated: {
            double gain = 1.0;
            double extra = 0.0;
            if (cfg.imprecise) {
                gain = cfg.imprecise->L;
                extra = (cfg.m1 + cfg.m2) * cfg.imprecise->inverse_delta();
            }
            auto eta = [&](double num_rho2, double den_rho2) {
                return (s0 + gain * sx * num_rho2 + extra) / (s0 + gain * sx * den_rho2 + extra);
            };
            return {eta(s.rho2_at(n - cfg.m2 + 1), s.rho2_at(cfg.m1)),
                    eta(s.rho2_at(n), s.rho2_at(1))};
        }
        case DetectorKind::fully_correlated: {
            const double e =
                (s0 + cfg.m2 * sx * s.rho2_at(n)) / (s0 + cfg.m1 * sx * s.rho2_at(1));
            return {e, e};
        }
        case DetectorKind::known_var_max_unc:
            return {s0 / (s0 + sx * s.rho2_at(cfg.m1)), s0 / (s0 + sx * s.rho2_at(1))};
        case DetectorKind::known_var_fully_corr: {
            const double e = s0 / (s0 + cfg.m1 * sx * s.rho2_at(1));
            return {e, e};
        }
    }
    throw std::invalid_argument("theory: unknown detector kind");
}

TheoreticalPerf perf_at_threshold(const Spectrum& spectrum, const PerfConfig& cfg, double gamma) {
    if (!(gamma >= 0.0)) throw std::domain_error("theory: threshold must be >= 0");
    const auto [lb, ub] = shift_factors(spectrum, cfg);
    return finish(cfg, gamma, null_tail(cfg.kind, cfg.m1, cfg.m2, cfg.nb, gamma), lb, ub);
}

TheoreticalPerf perf_at_pfa(const Spectrum& spectrum, const PerfConfig& cfg, double pfa) {
    const auto [lb, ub] = shift_factors(spectrum, cfg);
    const double gamma = threshold_for_pfa(cfg.kind, cfg.m1, cfg.m2, cfg.nb, pfa);
    return finish(cfg, gamma, pfa, lb, ub);
}

TheoreticalPerf perf_max_uncorrelated(const Spectrum& spectrum, int m1, int m2, int nb,
                                      double pfa) {
    return perf_at_pfa(spectrum, {DetectorKind::max_uncorrelated, m1, m2, nb, std::nullopt}, pfa);
}

TheoreticalPerf perf_max_uncorrelated(const SubspaceModel& model, int m1, int m2, int nb,
                                      double pfa) {
    return perf_max_uncorrelated(model.spectrum(), m1, m2, nb, pfa);
}

TheoreticalPerf perf_fully_correlated(const Spectrum& spectrum, int m1, int m2, int nb,
                                      double pfa) {
    return perf_at_pfa(spectrum, {DetectorKind::fully_correlated, m1, m2, nb, std::nullopt}, pfa);
}

TheoreticalPerf perf_fully_correlated(const SubspaceModel& model, int m1, int m2, int nb,
                                      double pfa) {
    return perf_fully_correlated(model.spectrum(), m1, m2, nb, pfa);
}

TheoreticalPerf perf_known_variance(const Spectrum& spectrum, int m1, int nb, double pfa,
                                    Strategy strategy) {
    return perf_at_pfa(spectrum, {detector_kind(strategy, true), m1, 0, nb, std::nullopt}, pfa);
}

TheoreticalPerf perf_known_variance(const SubspaceModel& model, int m1, int nb, double pfa,
                                    Strategy strategy) {
    return perf_known_variance(model.spectrum(), m1, nb, pfa, strategy);
}

TheoreticalPerf perf_imprecise(const Spectrum& spectrum, int m1, int m2, int nb, double pfa,
                               const ImpreciseConfig& cfg) {
    return perf_at_pfa(spectrum, {DetectorKind::max_uncorrelated, m1, m2, nb, cfg}, pfa);
}

TheoreticalPerf perf_imprecise(const SubspaceModel& model, int m1, int m2, int nb, double pfa,
                               const ImpreciseConfig& cfg) {
    return perf_imprecise(model.spectrum(), m1, m2, nb, pfa, cfg);
}

int hardware_budget_min(int m, double delta, double sigma_02) {
    if (m < 1 || !(delta > 0.0) || !(sigma_02 > 0.0)) {
        throw std::invalid_argument("hardware_budget_min: arguments must be positive");
    }
    if (std::isinf(delta)) return 1;
    const double bound = 1.0 + m / (delta * sigma_02);
    // Absorb representation error so an exactly integral bound is not bumped up.
    return static_cast<int>(std::ceil(bound - 1e-9 * bound));
}

TheoreticalPerf perf_dictionary_known_variance(const SubspaceModel& model,
                                               const MeasurementDesign& design, int nb,
                                               double pfa) {
    if (!design.known_variance) {
        throw std::invalid_argument("perf_dictionary_known_variance: design must be known-variance");
    }
    if (design.n() != model.n()) throw DimensionError("perf_dictionary_known_variance: N mismatch");
    const int m1 = design.m1();
    const Vector sv = svd(design.phi_s * model.h).singular_values;
    // rho~_i^2 = M1 sigma_i^2(Phi_s H): the ideal design gives back rho_i^2.
    // The fully-correlated rows already repeat M1 times, so sigma_1^2 carries
    // the factor M1 itself.
    Spectrum reduced;
    reduced.sigma_x2 = model.sigma_x2;
    reduced.sigma_02 = model.sigma_02;
    reduced.rho2 = Vector::Zero(std::max<Eigen::Index>(m1, 1));
    const Eigen::Index count = std::min<Eigen::Index>(sv.size(), reduced.rho2.size());
    const double scale = design.strategy == Strategy::max_uncorrelated ? m1 : 1.0;
    reduced.rho2.head(count) = scale * sv.head(count).array().square().matrix();
    return perf_known_variance(reduced, m1, nb, pfa, design.strategy);
}

std::pair<int, int> optimal_split_max_uncorrelated(int m, int nb) {
    if (m < 2) throw std::invalid_argument("optimal_split_max_uncorrelated: M must be >= 2");
    if (nb < 1) throw std::invalid_argument("optimal_split_max_uncorrelated: Nb must be >= 1");
    return {(m + 1) / 2, m / 2};
}

TheoreticalPerf perf_max_uncorrelated_normal_approx(const Spectrum& spectrum, int m1, int m2,
                                                    int nb, double pfa) {
    using namespace specfun;
    const PerfConfig cfg{DetectorKind::max_uncorrelated, m1, m2, nb, std::nullopt};
    const auto [lb, ub] = shift_factors(spectrum, cfg);
    const auto [mu, sigma] = f_normal_approx_params(DegreesOfFreedom(m1 * nb, m2 * nb));
    TheoreticalPerf p;
    p.pfa = pfa;
    p.gamma = mu + sigma * normal_tail_inv(pfa);
    p.eta_lb = lb;
    p.eta_ub = ub;
    p.pd_lb = normal_tail((lb * p.gamma - mu) / sigma);
    p.pd_ub = normal_tail((ub * p.gamma - mu) / sigma);
    if (std::abs(p.pd_ub - p.pd_lb) <= kExactTolerance) p.pd_exact = p.pd_lb;
    return p;
}

std::optional<PerfConfig> perf_config_for(const MeasurementDesign& design, int nb) {
    switch (design.kind) {
        case DesignKind::max_uncorrelated:
        case DesignKind::fully_correlated:
        case DesignKind::known_var_max_unc:
        case DesignKind::known_var_fully_corr:
            return PerfConfig{design.detector_kind(), design.m1(), design.m2(), nb, std::nullopt};
        default: return std::nullopt;
    }
}

}  // namespace csd
