#pragma once

#include "csd/design.hpp"
#include "csd/sample_block.hpp"

namespace csd {

struct DetectorOutcome {
    double statistic = 0.0;
    double threshold = 0.0;
    bool decided_h1 = false;
    DetectorKind kind = DetectorKind::max_uncorrelated;
};

/// (sum ||z_s[n]||^2 / M1) / (sum ||z_o[n]||^2 / M2). Under H0 ~ F(M1 Nb, M2 Nb).
double stat_max_uncorrelated(const SampleBlock& block);

/// M1 sum zbar_s[n]^2 / (M2 sum zbar_o[n]^2) with per-snapshot channel means.
/// Under H0 ~ F(Nb, Nb).
double stat_fully_correlated(const SampleBlock& block);

/// sum ||z_s[n]||^2 / (sigma_02 / M1). Under H0 ~ chi2(M1 Nb).
double stat_known_variance_maxunc(const SampleBlock& block, double sigma_02);

/// sum zbar_s[n]^2 / (sigma_02 / M1^2). Under H0 ~ chi2(Nb).
double stat_known_variance_fullycorr(const SampleBlock& block, double sigma_02);

/// Dispatches on the detector kind; sigma_02 is only read by the
/// known-variance kinds.
double statistic(DetectorKind kind, const SampleBlock& block, double sigma_02 = 0.0);

/// Inverse tail of the null distribution at pfa.
double threshold_for_pfa(DetectorKind kind, int m1, int m2, int nb, double pfa);

/// Null tail probability of a statistic value, i.e. the Pfa a threshold gives.
double null_tail(DetectorKind kind, int m1, int m2, int nb, double gamma);

/// H1 iff statistic > threshold; a tie decides H0.
DetectorOutcome decide(double statistic, double threshold,
                       DetectorKind kind = DetectorKind::max_uncorrelated);

/// Running channel sums so snapshots can be fed one at a time. The value of
/// the statistic only depends on the snapshots pushed so far.
class EnergyAccumulator {
public:
    EnergyAccumulator(DetectorKind kind, int m1, int m2);

    void push(const Eigen::Ref<const Vector>& zs, const Eigen::Ref<const Vector>& zo);
    void push(const SampleBlock& block);

    int snapshots() const { return nb_; }
    double statistic(double sigma_02 = 0.0) const;
    void reset();

private:
    DetectorKind kind_;
    int m1_;
    int m2_;
    int nb_ = 0;
    double energy_s_ = 0.0;
    double energy_o_ = 0.0;
    double mean_energy_s_ = 0.0;
    double mean_energy_o_ = 0.0;
};

}  // namespace csd
