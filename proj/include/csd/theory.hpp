#pragma once

#include "csd/design.hpp"
#include "csd/model.hpp"

#include <optional>
#include <utility>

namespace csd {

/// Closed-form operating point. Pd is bracketed by pd_lb <= Pd <= pd_ub,
/// where pd_lb = Q(eta_lb gamma) and pd_ub = Q(eta_ub gamma) for the null
/// tail Q of the detector; pd_exact is set when the bounds coincide.
struct TheoreticalPerf {
    double pfa = 0.0;
    double pd_lb = 0.0;
    double pd_ub = 0.0;
    std::optional<double> pd_exact;
    double gamma = 0.0;
    double eta_lb = 1.0;
    double eta_ub = 1.0;
};

/// A detector configuration whose Pd has a closed form. `imprecise` only
/// applies to the max-uncorrelated detector.
struct PerfConfig {
    DetectorKind kind = DetectorKind::max_uncorrelated;
    int m1 = 1;
    int m2 = 1;
    int nb = 1;
    std::optional<ImpreciseConfig> imprecise;
};

/// (eta_lb, eta_ub) for the configuration.
std::pair<double, double> shift_factors(const Spectrum& spectrum, const PerfConfig& cfg);

/// Operating point at a fixed threshold; pfa is the null tail at gamma.
TheoreticalPerf perf_at_threshold(const Spectrum& spectrum, const PerfConfig& cfg, double gamma);

/// Operating point at the threshold giving false-alarm probability pfa.
TheoreticalPerf perf_at_pfa(const Spectrum& spectrum, const PerfConfig& cfg, double pfa);

TheoreticalPerf perf_max_uncorrelated(const Spectrum& spectrum, int m1, int m2, int nb, double pfa);
TheoreticalPerf perf_max_uncorrelated(const SubspaceModel& model, int m1, int m2, int nb,
                                      double pfa);

TheoreticalPerf perf_fully_correlated(const Spectrum& spectrum, int m1, int m2, int nb, double pfa);
TheoreticalPerf perf_fully_correlated(const SubspaceModel& model, int m1, int m2, int nb,
                                      double pfa);

/// chi2 thresholds; bounds for the max-uncorrelated strategy, exact for the
/// fully-correlated one.
TheoreticalPerf perf_known_variance(const Spectrum& spectrum, int m1, int nb, double pfa,
                                    Strategy strategy);
TheoreticalPerf perf_known_variance(const SubspaceModel& model, int m1, int nb, double pfa,
                                    Strategy strategy);

/// Max-uncorrelated bounds with L replicated device banks and N(0, 1/delta)
/// measurement error per device. Pfa is the same as for precise devices.
TheoreticalPerf perf_imprecise(const Spectrum& spectrum, int m1, int m2, int nb, double pfa,
                               const ImpreciseConfig& cfg);
TheoreticalPerf perf_imprecise(const SubspaceModel& model, int m1, int m2, int nb, double pfa,
                               const ImpreciseConfig& cfg);

/// Smallest integer L with L >= 1 + M / (delta sigma_02).
int hardware_budget_min(int m, double delta, double sigma_02);

/// Known-variance bounds for a dictionary design, using the singular values
/// of Phi_s H with the 1/sqrt(M1) row scaling factored out.
TheoreticalPerf perf_dictionary_known_variance(const SubspaceModel& model,
                                               const MeasurementDesign& design, int nb,
                                               double pfa);

/// (ceil(M/2), floor(M/2)): the split minimizing the spread of the large-Nb
/// normal approximation of the F statistic.
std::pair<int, int> optimal_split_max_uncorrelated(int m, int nb);

/// Max-uncorrelated Pd bounds from the normal approximation of
/// F(M1 Nb, M2 Nb): gamma = mu + sigma Qz^-1(pfa), Pd = Qz((eta gamma - mu) / sigma).
TheoreticalPerf perf_max_uncorrelated_normal_approx(const Spectrum& spectrum, int m1, int m2,
                                                    int nb, double pfa);

/// Theory for a design produced by design_max_uncorrelated,
/// design_fully_correlated or design_known_variance. Empty for kinds without
/// a closed form.
std::optional<PerfConfig> perf_config_for(const MeasurementDesign& design, int nb);

}  // namespace csd
