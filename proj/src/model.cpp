#include "csd/model.hpp"

#include "csd/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace csd {

bool SubspaceModel::detectable() const {
    const double top = rho2(0);
    const double bottom = rho2(rho2.size() - 1);
    return top > bottom + kRankTolerance * top;
}

SubspaceModel SubspaceModel::with_variances(double sx2, double s02) const {
    if (!(sx2 >= 0.0) || !(s02 > 0.0)) {
        throw std::invalid_argument("subspace model: need sigma_x2 >= 0 and sigma_02 > 0");
    }
    SubspaceModel out = *this;
    out.sigma_x2 = sx2;
    out.sigma_02 = s02;
    return out;
}

SubspaceModel make_subspace_model(Matrix h, double sigma_x2, double sigma_02) {
    if (h.rows() == 0 || h.cols() == 0) throw DimensionError("subspace model: H is empty");
    if (h.cols() > h.rows()) {
        throw DimensionError("subspace model: K (" + std::to_string(h.cols()) +
                             ") exceeds N (" + std::to_string(h.rows()) + ")");
    }
    if (!(sigma_x2 >= 0.0) || !(sigma_02 > 0.0)) {
        throw std::invalid_argument("subspace model: need sigma_x2 >= 0 and sigma_02 > 0");
    }
    SubspaceModel m;
    m.svd = svd(h);
    const Vector& s = m.svd.singular_values;
    if (!(s(s.size() - 1) > kRankTolerance * s(0))) {
        throw RankError("subspace model: H is not full column rank");
    }
    m.rho2 = Vector::Zero(h.rows());
    m.rho2.head(s.size()) = s.array().square().matrix();
    m.h = std::move(h);
    m.sigma_x2 = sigma_x2;
    m.sigma_02 = sigma_02;
    return m;
}

Matrix random_gaussian_matrix(int rows, int cols, double variance, Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::sqrt(variance));
    Matrix out(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) out(i, j) = normal(rng);
    }
    return out;
}

Matrix random_orthonormal_columns(int n, int k, Rng& rng) {
    if (k < 1 || k > n) throw DimensionError("random_orthonormal_columns: need 1 <= k <= n");
    const Matrix g = random_gaussian_matrix(n, k, 1.0, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, k);
    // Fix the QR sign ambiguity (diag(R) > 0) so the frame is Haar distributed.
    const Matrix& r = qr.matrixQR();
    for (int j = 0; j < k; ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return q;
}

SubspaceModel gen_random_subspace(int n, int k, double sigma_x2, double sigma_02, Rng& rng) {
    if (n < 1 || k < 1) throw DimensionError("gen_random_subspace: N and K must be positive");
    if (k > n) {
        throw DimensionError("gen_random_subspace: K (" + std::to_string(k) + ") exceeds N (" +
                             std::to_string(n) + ")");
    }
    return make_subspace_model(random_gaussian_matrix(n, k, 1.0 / k, rng), sigma_x2, sigma_02);
}

SubspaceModel gen_random_subspace(int n, int k, double sigma_x2, double sigma_02,
                                  std::uint64_t seed) {
    Rng rng(seed);
    return gen_random_subspace(n, k, sigma_x2, sigma_02, rng);
}

SubspaceModel gen_structured_subspace(int n, std::span<const double> rho2_spec, double sigma_x2,
                                      double sigma_02, Rng& rng) {
    if (n < 1) throw DimensionError("gen_structured_subspace: N must be positive");
    if (rho2_spec.size() > static_cast<std::size_t>(n)) {
        throw DimensionError("gen_structured_subspace: spectrum longer than N");
    }
    int support = 0;
    for (std::size_t i = 0; i < rho2_spec.size(); ++i) {
        const double v = rho2_spec[i];
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("gen_structured_subspace: entries must be finite and >= 0");
        }
        if (i > 0 && v > rho2_spec[i - 1]) {
            throw std::invalid_argument("gen_structured_subspace: spectrum is not descending");
        }
        if (v > 0.0) ++support;
    }
    if (support == 0) {
        throw std::invalid_argument("gen_structured_subspace: spectrum has no positive entry");
    }
    Matrix h = random_orthonormal_columns(n, support, rng);
    for (int j = 0; j < support; ++j) h.col(j) *= std::sqrt(rho2_spec[j]);
    return make_subspace_model(std::move(h), sigma_x2, sigma_02);
}

SubspaceModel gen_structured_subspace(int n, std::span<const double> rho2_spec, double sigma_x2,
                                      double sigma_02, std::uint64_t seed) {
    Rng rng(seed);
    return gen_structured_subspace(n, rho2_spec, sigma_x2, sigma_02, rng);
}

UnionModel make_union_model(std::vector<Matrix> members, std::vector<double> pi) {
    if (members.empty()) throw std::invalid_argument("union model: no members");
    if (members.size() != pi.size()) {
        throw DimensionError("union model: " + std::to_string(members.size()) + " members but " +
                             std::to_string(pi.size()) + " probabilities");
    }
    const Eigen::Index n = members.front().rows();
    for (const Matrix& h : members) {
        if (h.rows() != n || h.cols() == 0) {
            throw DimensionError("union model: members must share the row dimension N");
        }
    }
    double total = 0.0;
    for (double p : pi) {
        if (!(p >= 0.0)) throw std::invalid_argument("union model: negative probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("union model: probabilities sum to " + std::to_string(total));
    }
    return {std::move(members), std::move(pi)};
}

UnionModel make_uniform_union(std::vector<Matrix> members) {
    std::vector<double> pi(members.size(), members.empty() ? 0.0 : 1.0 / members.size());
    // Put the rounding residue on the last weight so the sum is exact to 1e-12.
    if (!pi.empty()) {
        const double head = std::accumulate(pi.begin(), pi.end() - 1, 0.0);
        pi.back() = 1.0 - head;
    }
    return make_union_model(std::move(members), std::move(pi));
}

double ImpreciseConfig::inverse_delta() const {
    return std::isinf(delta) ? 0.0 : 1.0 / delta;
}

void validate(const ImpreciseConfig& cfg) {
    if (!(cfg.delta > 0.0)) throw std::invalid_argument("imprecise config: delta must be > 0");
    if (cfg.L < 1) throw std::invalid_argument("imprecise config: L must be >= 1");
}

}  // namespace csd
