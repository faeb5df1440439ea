#include "oracles.hpp"

#include "csd/detect.hpp"
#include "csd/design.hpp"
#include "csd/errors.hpp"
#include "csd/model.hpp"
#include "csd/specfun.hpp"
#include "csd/theory.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace csd;

namespace {

Spectrum make_spectrum(std::vector<double> rho2, double sx2, double s02) {
    Vector v = Eigen::Map<Vector>(rho2.data(), static_cast<Eigen::Index>(rho2.size()));
    return {v, sx2, s02};
}

// Shift factors of the max-uncorrelated detector for an arbitrary design:
// eigenvalues of the channel covariances bound the numerator and denominator
// energies, so eta ranges over ratios of extreme eigenvalues.
std::pair<double, double> general_phi_bounds(const Matrix& phi_s, const Matrix& phi_o,
                                             const Matrix& h, double sx2, double s02) {
    const int m = static_cast<int>(phi_s.rows() + phi_o.rows());
    auto eig = [&](const Matrix& phi) {
        const Matrix c = m * (phi * h) * (phi * h).transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()));
        return es.eigenvalues();
    };
    const Vector es = eig(phi_s);
    const Vector eo = eig(phi_o);
    const double lb = (s02 + sx2 * eo.maxCoeff()) / (s02 + sx2 * es.minCoeff());
    const double ub = (s02 + sx2 * eo.minCoeff()) / (s02 + sx2 * es.maxCoeff());
    return {lb, ub};
}

}  // namespace

TEST_CASE("max-uncorrelated bounds from the spectrum") {
    const Spectrum s = make_spectrum({5.0, 3.0, 2.0, 1.0, 0.5, 0.0}, 2.0, 1.0);
    const TheoreticalPerf p = perf_max_uncorrelated(s, 2, 3, 4, 0.05);
    // Signal rows reach rho_2 at worst, reference rows rho_4 = 1 at best.
    CHECK(p.eta_lb == doctest::Approx((1.0 + 2.0 * 1.0) / (1.0 + 2.0 * 3.0)));
    CHECK(p.eta_ub == doctest::Approx((1.0 + 0.0) / (1.0 + 2.0 * 5.0)));
    CHECK(oracle::f_tail(8, 12, p.gamma) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(p.pd_lb == doctest::Approx(oracle::f_tail(8, 12, p.eta_lb * p.gamma)).epsilon(1e-9));
    CHECK(p.pd_ub == doctest::Approx(oracle::f_tail(8, 12, p.eta_ub * p.gamma)).epsilon(1e-9));
    CHECK(p.pd_lb <= p.pd_ub);
    CHECK_FALSE(p.pd_exact.has_value());
}

TEST_CASE("flat signal and reference spectra make the bounds coincide") {
    const Spectrum s = make_spectrum({4.0, 4.0, 4.0, 1.0, 1.0}, 1.0, 1.0);
    const TheoreticalPerf p = perf_max_uncorrelated(s, 2, 2, 3, 0.01);
    REQUIRE(p.pd_exact.has_value());
    CHECK(*p.pd_exact == p.pd_lb);
    CHECK(p.eta_lb == doctest::Approx(0.4));
}

TEST_CASE("zero signal gives Pd = Pfa") {
    const Spectrum s = make_spectrum({5.0, 1.0, 0.0}, 0.0, 1.0);
    for (auto [kind, m2] : {std::pair{DetectorKind::max_uncorrelated, 1},
                            std::pair{DetectorKind::fully_correlated, 1},
                            std::pair{DetectorKind::known_var_max_unc, 0},
                            std::pair{DetectorKind::known_var_fully_corr, 0}}) {
        const TheoreticalPerf p = perf_at_pfa(s, PerfConfig{kind, 2, m2, 5, std::nullopt}, 0.1);
        CHECK(p.pd_lb == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(p.pd_ub == doctest::Approx(0.1).epsilon(1e-12));
    }
}

TEST_CASE("fully-correlated and known-variance shift factors") {
    const Spectrum s = make_spectrum({10.0, 2.0, 0.5}, 1.0, 2.0);
    const TheoreticalPerf fc = perf_fully_correlated(s, 3, 2, 5, 0.01);
    CHECK(fc.eta_lb == doctest::Approx((2.0 + 2.0 * 0.5) / (2.0 + 3.0 * 10.0)));
    REQUIRE(fc.pd_exact.has_value());
    CHECK(*fc.pd_exact == doctest::Approx(oracle::f_tail(5, 5, fc.eta_lb * fc.gamma)).epsilon(1e-9));

    const TheoreticalPerf kv = perf_known_variance(s, 2, 5, 0.01, Strategy::max_uncorrelated);
    CHECK(kv.eta_lb == doctest::Approx(2.0 / (2.0 + 2.0)));
    CHECK(kv.eta_ub == doctest::Approx(2.0 / (2.0 + 10.0)));
    CHECK(kv.pd_lb == doctest::Approx(oracle::chi2_tail(10, kv.eta_lb * kv.gamma)).epsilon(1e-9));

    const TheoreticalPerf kf = perf_known_variance(s, 2, 5, 0.01, Strategy::fully_correlated);
    CHECK(kf.eta_lb == doctest::Approx(2.0 / (2.0 + 2.0 * 10.0)));
    REQUIRE(kf.pd_exact.has_value());
}

TEST_CASE("bounds hold for every design, not just the optimal one") {
    // General-design bounds evaluated by eigen-decomposition agree with the
    // closed form at the optimal design and bracket it otherwise.
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        const SubspaceModel model = gen_random_subspace(8, 3, 1.5, 1.0, rng);
        const MeasurementDesign d = design_max_uncorrelated(model, 2, 2);
        const auto [lb, ub] = general_phi_bounds(d.phi_s, d.phi_o, model.h, 1.5, 1.0);
        const auto eta = shift_factors(model.spectrum(), PerfConfig{DetectorKind::max_uncorrelated, 2, 2, 3, std::nullopt});
        CHECK(eta.first == doctest::Approx(lb).epsilon(1e-10));
        CHECK(eta.second == doctest::Approx(ub).epsilon(1e-10));

        const Matrix frame = oracle::gram_schmidt_frame(8, 4, rng).transpose() / 2.0;
        const auto [glb, gub] =
            general_phi_bounds(frame.topRows(2), frame.bottomRows(2), model.h, 1.5, 1.0);
        // The optimal design's worst case is at least as good as the best
        // guarantee of any other design.
        CHECK(eta.first <= glb + 1e-12);
        CHECK(eta.second <= gub + 1e-12);
    }
}

TEST_CASE("hardware budget") {
    CHECK(hardware_budget_min(2, 0.01, 100.0) == 3);
    CHECK(hardware_budget_min(4, 1.0, 4.0) == 2);
    CHECK(hardware_budget_min(4, 0.5, 1.0) == 9);
    CHECK(hardware_budget_min(2, std::numeric_limits<double>::infinity(), 1.0) == 1);
}

TEST_CASE("imprecise devices at the compensating budget match precise ones") {
    const Spectrum s = make_spectrum({100.0, 0.0}, 1.0, 100.0);
    const TheoreticalPerf precise = perf_max_uncorrelated(s, 1, 1, 5, 0.05);
    const TheoreticalPerf l3 = perf_imprecise(s, 1, 1, 5, 0.05, ImpreciseConfig{0.01, 3});
    CHECK(std::abs(l3.pd_lb - precise.pd_lb) <= 1e-12);
    CHECK(std::abs(l3.pd_ub - precise.pd_ub) <= 1e-12);
    const TheoreticalPerf l1 = perf_imprecise(s, 1, 1, 5, 0.05, ImpreciseConfig{0.01, 1});
    const TheoreticalPerf l5 = perf_imprecise(s, 1, 1, 5, 0.05, ImpreciseConfig{0.01, 5});
    CHECK(l1.pd_lb < precise.pd_lb);
    CHECK(l5.pd_lb > precise.pd_lb);
    const TheoreticalPerf inf =
        perf_imprecise(s, 1, 1, 5, 0.05, ImpreciseConfig{std::numeric_limits<double>::infinity(), 1});
    CHECK(inf.pd_lb == doctest::Approx(precise.pd_lb).epsilon(1e-14));
    CHECK(l1.pfa == precise.pfa);
}

TEST_CASE("optimal split and normal approximation") {
    CHECK(optimal_split_max_uncorrelated(16, 50) == std::pair{8, 8});
    CHECK(optimal_split_max_uncorrelated(7, 5) == std::pair{4, 3});
    CHECK_THROWS_AS(optimal_split_max_uncorrelated(1, 5), std::invalid_argument);

    Spectrum tilted = make_spectrum(std::vector<double>(16, 1.0), 0.1, 1.0);
    for (int i = 0; i < 8; ++i) tilted.rho2(i) = 2.0;
    for (int m1 = 1; m1 < 16; ++m1) {
        const TheoreticalPerf exact = perf_max_uncorrelated(tilted, m1, 16 - m1, 200, 0.05);
        const TheoreticalPerf approx =
            perf_max_uncorrelated_normal_approx(tilted, m1, 16 - m1, 200, 0.05);
        CHECK(std::abs(exact.pd_lb - approx.pd_lb) < 0.05);
    }
    const Spectrum wide = make_spectrum(std::vector<double>(1000, 1.0), 0.1, 1.0);
    const double mu = 1000.0 / 998.0;
    const TheoreticalPerf a = perf_max_uncorrelated_normal_approx(wide, 500, 500, 2, 0.05);
    const double sigma = mu * std::sqrt(2.0 * 1998.0 / (1000.0 * 996.0));
    CHECK(a.gamma == doctest::Approx(mu + sigma * specfun::normal_tail_inv(0.05)).epsilon(1e-12));
}

TEST_CASE("dictionary known-variance theory agrees with the optimal design") {
    Rng rng(22);
    const SubspaceModel model = gen_random_subspace(6, 2, 1.0, 1.0, rng);
    const Dictionary dict = Dictionary::from_orthonormal(model.svd.u, 3);
    const MeasurementDesign d = design_from_dictionary(model, dict, 3, 0, Strategy::max_uncorrelated);
    const TheoreticalPerf a = perf_dictionary_known_variance(model, d, 5, 0.05);
    const TheoreticalPerf b = perf_known_variance(model, 3, 5, 0.05, Strategy::max_uncorrelated);
    CHECK(a.pd_lb == doctest::Approx(b.pd_lb).epsilon(1e-10));
    CHECK(a.pd_ub == doctest::Approx(b.pd_ub).epsilon(1e-10));
}

TEST_CASE("perf config for designs") {
    Rng rng(23);
    const SubspaceModel model = gen_random_subspace(6, 2, 1.0, 1.0, rng);
    const auto cfg = perf_config_for(design_fully_correlated(model, 2, 3), 7);
    REQUIRE(cfg.has_value());
    CHECK(cfg->kind == DetectorKind::fully_correlated);
    CHECK(cfg->m1 == 2);
    CHECK(cfg->m2 == 3);
    CHECK(cfg->nb == 7);
    const Matrix g = random_gaussian_matrix(6, 1, 1.0, rng);
    CHECK_FALSE(perf_config_for(design_with_interference(model, g, 1, 1, Strategy::max_uncorrelated), 3)
                    .has_value());
}
