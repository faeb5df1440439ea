#include "csd/sampling.hpp"

#include "csd/design.hpp"
#include "csd/errors.hpp"

#include <cmath>
#include <string>

namespace csd {

namespace {

Matrix draw_signal(int k, int nb, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(k, nb);
    for (int n = 0; n < nb; ++n) {
        for (int i = 0; i < k; ++i) x(i, n) = normal(rng);
    }
    return x;
}

// One device-noise realization: row m of the result is phi_m^T w_m[n] with
// w_m[n] ~ N(0, sigma_02 I_N) drawn independently for every (m, n).
Matrix draw_device_noise(const Matrix& phi, double sigma_02, int nb, Rng& rng, NoiseModel noise) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index m_total = phi.rows();
    const Eigen::Index n_dim = phi.cols();
    const double sigma0 = std::sqrt(sigma_02);
    Matrix out(m_total, nb);
    if (noise == NoiseModel::projected) {
        const Vector row_norms = phi.rowwise().norm();
        for (int n = 0; n < nb; ++n) {
            for (Eigen::Index m = 0; m < m_total; ++m) {
                out(m, n) = sigma0 * row_norms(m) * normal(rng);
            }
        }
        return out;
    }
    Vector w(n_dim);
    for (int n = 0; n < nb; ++n) {
        for (Eigen::Index m = 0; m < m_total; ++m) {
            for (Eigen::Index i = 0; i < n_dim; ++i) w(i) = normal(rng);
            out(m, n) = sigma0 * phi.row(m).dot(w);
        }
    }
    return out;
}

void check_shapes(const MeasurementDesign& design, const Matrix& h, int nb) {
    if (nb < 1) throw DimensionError("sampler: Nb must be >= 1");
    if (design.n() != h.rows()) {
        throw DimensionError("sampler: design has N = " + std::to_string(design.n()) +
                             " but H has " + std::to_string(h.rows()) + " rows");
    }
    if (design.phi_o.rows() > 0 && design.phi_o.cols() != design.phi_s.cols()) {
        throw DimensionError("sampler: Phi_s and Phi_o column counts differ");
    }
}

SampleBlock split(const Matrix& z, int m1) {
    return {z.topRows(m1), z.bottomRows(z.rows() - m1)};
}

}  // namespace

SampleBlock sample_block(const MeasurementDesign& design, const Matrix& h, double sigma_x2,
                         double sigma_02, int nb, Hypothesis hyp, Rng& rng, NoiseModel noise) {
    auto blocks = sample_replicates(design, h, sigma_x2, sigma_02, nb, hyp, 1, rng, noise);
    return std::move(blocks.front());
}

std::vector<SampleBlock> sample_replicates(const MeasurementDesign& design, const Matrix& h,
                                           double sigma_x2, double sigma_02, int nb,
                                           Hypothesis hyp, int replicas, Rng& rng,
                                           NoiseModel noise) {
    check_shapes(design, h, nb);
    if (replicas < 1) throw std::invalid_argument("sampler: replica count must be >= 1");
    const Matrix phi = design.phi();
    Matrix signal;
    if (hyp == Hypothesis::h1) {
        const Matrix phi_h = phi * h;
        if (noise == NoiseModel::projected) {
            // Phi H x has covariance sigma_x2 (Phi H)(Phi H)^T; U S g with
            // g ~ N(0, I_r) has the same law and needs only r <= M coefficients.
            Eigen::JacobiSVD<Matrix> factor(phi_h, Eigen::ComputeThinU);
            const Matrix scaled = factor.matrixU() * factor.singularValues().asDiagonal();
            const Matrix g = draw_signal(static_cast<int>(scaled.cols()), nb, rng);
            signal = std::sqrt(sigma_x2) * scaled * g;
        } else {
            const Matrix x = draw_signal(static_cast<int>(h.cols()), nb, rng);
            signal = std::sqrt(sigma_x2) * phi_h * x;
        }
    }
    std::vector<SampleBlock> out;
    out.reserve(replicas);
    for (int r = 0; r < replicas; ++r) {
        Matrix z = draw_device_noise(phi, sigma_02, nb, rng, noise);
        if (hyp == Hypothesis::h1) z += signal;
        out.push_back(split(z, design.m1()));
    }
    return out;
}

SampleBlock sample_measurements(const SubspaceModel& model, const MeasurementDesign& design,
                                int nb, Hypothesis hyp, std::uint64_t seed, NoiseModel noise) {
    Rng rng(seed);
    return sample_block(design, model.h, model.sigma_x2, model.sigma_02, nb, hyp, rng, noise);
}

SampleBlock apply_imprecision(std::span<const SampleBlock> replicas, const ImpreciseConfig& cfg,
                              Rng& rng) {
    validate(cfg);
    if (replicas.size() != static_cast<std::size_t>(cfg.L)) {
        throw std::invalid_argument("apply_imprecision: got " + std::to_string(replicas.size()) +
                                    " replicas for L = " + std::to_string(cfg.L));
    }
    const SampleBlock& first = replicas.front();
    for (const SampleBlock& b : replicas) {
        if (b.zs.rows() != first.zs.rows() || b.zo.rows() != first.zo.rows() ||
            b.nb() != first.nb()) {
            throw DimensionError("apply_imprecision: replica shapes differ");
        }
    }
    const double scale = std::sqrt(cfg.inverse_delta());
    std::normal_distribution<double> normal(0.0, 1.0);
    auto perturb = [&](Matrix m) {
        if (scale == 0.0) return m;
        for (Eigen::Index n = 0; n < m.cols(); ++n) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, n) += scale * normal(rng);
        }
        return m;
    };
    SampleBlock acc{perturb(first.zs), perturb(first.zo)};
    for (std::size_t r = 1; r < replicas.size(); ++r) {
        acc.zs += perturb(replicas[r].zs);
        acc.zo += perturb(replicas[r].zo);
    }
    if (cfg.L > 1) {
        acc.zs /= cfg.L;
        acc.zo /= cfg.L;
    }
    return acc;
}

SampleBlock apply_imprecision(std::span<const SampleBlock> replicas, const ImpreciseConfig& cfg,
                              std::uint64_t seed) {
    Rng rng(seed);
    return apply_imprecision(replicas, cfg, rng);
}

SampleBlock apply_imprecision(const SampleBlock& block, const ImpreciseConfig& cfg,
                              std::uint64_t seed) {
    return apply_imprecision(std::span<const SampleBlock>(&block, 1), cfg, seed);
}

}  // namespace csd
