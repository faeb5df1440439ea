#include "csd/detect.hpp"

#include "csd/errors.hpp"
#include "csd/specfun.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace csd {

namespace {

void require_both_channels(const SampleBlock& block, const char* who) {
    if (block.m1() < 1 || block.m2() < 1) {
        throw DimensionError(std::string(who) + ": needs M1 >= 1 and M2 >= 1");
    }
    if (block.zs.cols() != block.zo.cols() || block.nb() < 1) {
        throw DimensionError(std::string(who) + ": channels must share Nb >= 1");
    }
}

void require_known_variance(const SampleBlock& block, double sigma_02, const char* who) {
    if (block.m1() < 1 || block.nb() < 1) {
        throw DimensionError(std::string(who) + ": needs M1 >= 1 and Nb >= 1");
    }
    if (!(sigma_02 > 0.0)) {
        throw std::invalid_argument(std::string(who) + ": sigma_02 must be > 0");
    }
}

double safe_ratio(double num, double den, const char* who) {
    if (den == 0.0) {
        throw NumericalError(std::string(who) + ": zero energy in the reference channel");
    }
    return num / den;
}

// sum over snapshots of the squared channel mean.
double mean_energy(const Matrix& z) {
    return (z.colwise().sum() / static_cast<double>(z.rows())).squaredNorm();
}

}  // namespace

double stat_max_uncorrelated(const SampleBlock& block) {
    require_both_channels(block, "stat_max_uncorrelated");
    // Per-row energies: every row has the same null variance, so this ratio
    // is F(M1 Nb, M2 Nb) for any split, not only M1 = M2.
    return safe_ratio(block.m2() * block.zs.squaredNorm(), block.m1() * block.zo.squaredNorm(),
                      "stat_max_uncorrelated");
}

double stat_fully_correlated(const SampleBlock& block) {
    require_both_channels(block, "stat_fully_correlated");
    return safe_ratio(block.m1() * mean_energy(block.zs), block.m2() * mean_energy(block.zo),
                      "stat_fully_correlated");
}

double stat_known_variance_maxunc(const SampleBlock& block, double sigma_02) {
    require_known_variance(block, sigma_02, "stat_known_variance_maxunc");
    return block.zs.squaredNorm() / (sigma_02 / block.m1());
}

double stat_known_variance_fullycorr(const SampleBlock& block, double sigma_02) {
    require_known_variance(block, sigma_02, "stat_known_variance_fullycorr");
    const double m1 = block.m1();
    return mean_energy(block.zs) / (sigma_02 / (m1 * m1));
}

double statistic(DetectorKind kind, const SampleBlock& block, double sigma_02) {
    switch (kind) {
        case DetectorKind::max_uncorrelated: return stat_max_uncorrelated(block);
        case DetectorKind::fully_correlated: return stat_fully_correlated(block);
        case DetectorKind::known_var_max_unc: return stat_known_variance_maxunc(block, sigma_02);
        case DetectorKind::known_var_fully_corr:
            return stat_known_variance_fullycorr(block, sigma_02);
    }
    throw std::invalid_argument("statistic: unknown detector kind");
}

double threshold_for_pfa(DetectorKind kind, int m1, int m2, int nb, double pfa) {
    using namespace specfun;
    if (!(pfa > 0.0 && pfa < 1.0)) {
        throw std::domain_error("threshold_for_pfa: pfa must lie in (0, 1)");
    }
    switch (kind) {
        case DetectorKind::max_uncorrelated:
            return f_tail_inv(DegreesOfFreedom(m1 * nb, m2 * nb), pfa);
        case DetectorKind::fully_correlated: return f_tail_inv(DegreesOfFreedom(nb, nb), pfa);
        case DetectorKind::known_var_max_unc: return chi2_tail_inv(m1 * nb, pfa);
        case DetectorKind::known_var_fully_corr: return chi2_tail_inv(nb, pfa);
    }
    throw std::invalid_argument("threshold_for_pfa: unknown detector kind");
}

double null_tail(DetectorKind kind, int m1, int m2, int nb, double gamma) {
    using namespace specfun;
    switch (kind) {
        case DetectorKind::max_uncorrelated:
            return f_tail(DegreesOfFreedom(m1 * nb, m2 * nb), gamma);
        case DetectorKind::fully_correlated: return f_tail(DegreesOfFreedom(nb, nb), gamma);
        case DetectorKind::known_var_max_unc: return chi2_tail(m1 * nb, gamma);
        case DetectorKind::known_var_fully_corr: return chi2_tail(nb, gamma);
    }
    throw std::invalid_argument("null_tail: unknown detector kind");
}

DetectorOutcome decide(double statistic, double threshold, DetectorKind kind) {
    return {statistic, threshold, statistic > threshold, kind};
}

EnergyAccumulator::EnergyAccumulator(DetectorKind kind, int m1, int m2)
    : kind_(kind), m1_(m1), m2_(m2) {
    const bool known = kind == DetectorKind::known_var_max_unc ||
                       kind == DetectorKind::known_var_fully_corr;
    if (m1 < 1 || (known ? m2 != 0 : m2 < 1)) {
        throw DimensionError("EnergyAccumulator: channel sizes do not match the detector kind");
    }
}

void EnergyAccumulator::push(const Eigen::Ref<const Vector>& zs,
                             const Eigen::Ref<const Vector>& zo) {
    if (zs.size() != m1_ || zo.size() != m2_) {
        throw DimensionError("EnergyAccumulator: snapshot length mismatch");
    }
    energy_s_ += zs.squaredNorm();
    const double mean_s = zs.sum() / m1_;
    mean_energy_s_ += mean_s * mean_s;
    if (m2_ > 0) {
        energy_o_ += zo.squaredNorm();
        const double mean_o = zo.sum() / m2_;
        mean_energy_o_ += mean_o * mean_o;
    }
    ++nb_;
}

void EnergyAccumulator::push(const SampleBlock& block) {
    for (int n = 0; n < block.nb(); ++n) {
        if (m2_ > 0) {
            push(block.zs.col(n), block.zo.col(n));
        } else {
            push(block.zs.col(n), Vector());
        }
    }
}

double EnergyAccumulator::statistic(double sigma_02) const {
    if (nb_ == 0) throw std::logic_error("EnergyAccumulator: no snapshots pushed");
    const bool known = kind_ == DetectorKind::known_var_max_unc ||
                       kind_ == DetectorKind::known_var_fully_corr;
    if (known && !(sigma_02 > 0.0)) {
        throw std::invalid_argument("EnergyAccumulator: sigma_02 must be > 0");
    }
    switch (kind_) {
        case DetectorKind::max_uncorrelated:
            return safe_ratio(m2_ * energy_s_, m1_ * energy_o_, "EnergyAccumulator");
        case DetectorKind::fully_correlated:
            return safe_ratio(m1_ * mean_energy_s_, m2_ * mean_energy_o_, "EnergyAccumulator");
        case DetectorKind::known_var_max_unc: return energy_s_ / (sigma_02 / m1_);
        case DetectorKind::known_var_fully_corr:
            return mean_energy_s_ / (sigma_02 / (static_cast<double>(m1_) * m1_));
    }
    throw std::invalid_argument("EnergyAccumulator: unknown detector kind");
}

void EnergyAccumulator::reset() {
    nb_ = 0;
    energy_s_ = energy_o_ = mean_energy_s_ = mean_energy_o_ = 0.0;
}

}  // namespace csd
