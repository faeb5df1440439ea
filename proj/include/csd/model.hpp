#pragma once

#include "csd/spectral.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace csd {

using Rng = std::mt19937_64;

/// Eigenvalues rho_i^2 of H H^T (descending, zero-padded to N) together with
/// the signal and noise variances: everything the closed-form performance
/// expressions need.
struct Spectrum {
    Vector rho2;
    double sigma_x2 = 0.0;
    double sigma_02 = 1.0;

    int n() const { return static_cast<int>(rho2.size()); }
    /// 1-based access matching the usual rho_1 >= ... >= rho_N numbering.
    double rho2_at(int i) const { return rho2(i - 1); }
};

/// s[n] = H x[n] with x[n] ~ N(0, sigma_x2 I_K) observed in N(0, sigma_02 I_N)
/// ambient noise. The SVD of H is computed once at construction.
struct SubspaceModel {
    Matrix h;
    double sigma_x2 = 0.0;
    double sigma_02 = 1.0;
    SvdResult svd;
    Vector rho2;

    int n() const { return static_cast<int>(h.rows()); }
    int k() const { return static_cast<int>(h.cols()); }
    /// rho_1^2 > rho_N^2: the energy is not spread evenly over all directions.
    bool detectable() const;
    Spectrum spectrum() const { return {rho2, sigma_x2, sigma_02}; }
    SubspaceModel with_variances(double sx2, double s02) const;
};

/// Validates H (K <= N, full column rank, finite) and caches its SVD.
/// sigma_x2 may be zero (signal absent); sigma_02 must be positive.
SubspaceModel make_subspace_model(Matrix h, double sigma_x2, double sigma_02);

/// Entries iid N(0, 1/K), so each row has expected squared norm one.
SubspaceModel gen_random_subspace(int n, int k, double sigma_x2, double sigma_02,
                                  std::uint64_t seed);
SubspaceModel gen_random_subspace(int n, int k, double sigma_x2, double sigma_02, Rng& rng);

/// H = Q diag(sqrt(rho2)) with Q a Haar-random N x K' orthonormal frame and K'
/// the number of positive entries. rho2_spec must be descending and
/// nonnegative; a spec shorter than N is padded with zeros.
SubspaceModel gen_structured_subspace(int n, std::span<const double> rho2_spec, double sigma_x2,
                                      double sigma_02, std::uint64_t seed);
SubspaceModel gen_structured_subspace(int n, std::span<const double> rho2_spec, double sigma_x2,
                                      double sigma_02, Rng& rng);

Matrix random_gaussian_matrix(int rows, int cols, double variance, Rng& rng);
/// N x K matrix with orthonormal columns, Haar distributed.
Matrix random_orthonormal_columns(int n, int k, Rng& rng);

/// Signal drawn from one of Q subspaces, P(H = H_q) = pi_q.
struct UnionModel {
    std::vector<Matrix> members;
    std::vector<double> pi;

    int q() const { return static_cast<int>(members.size()); }
    int n() const { return members.empty() ? 0 : static_cast<int>(members.front().rows()); }
};

UnionModel make_union_model(std::vector<Matrix> members, std::vector<double> pi);
UnionModel make_uniform_union(std::vector<Matrix> members);

/// Measurement imprecision: every compressive output carries extra
/// N(0, 1/delta) noise; each nominal device is replicated L times and the
/// replicas are averaged. delta = +inf means perfectly precise devices.
struct ImpreciseConfig {
    double delta = 1.0;
    int L = 1;

    double inverse_delta() const;
};

void validate(const ImpreciseConfig& cfg);

}  // namespace csd
