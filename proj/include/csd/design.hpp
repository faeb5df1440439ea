#pragma once

#include "csd/model.hpp"
#include "csd/spectral.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace csd {

/// How the rows of each channel are arranged.
///  max_uncorrelated: M1 (M2) distinct orthogonal directions, M Phi Phi^T = I.
///  fully_correlated: every Phi_s row is the strongest direction, every Phi_o
///                    row the weakest; outputs are averaged per channel.
enum class Strategy { max_uncorrelated, fully_correlated };

enum class DesignKind {
    max_uncorrelated,
    fully_correlated,
    known_var_max_unc,
    known_var_fully_corr,
    dictionary,
    union_of_subspaces,
    interference,
};

/// The four test statistics; a design determines which one applies.
enum class DetectorKind { max_uncorrelated, fully_correlated, known_var_max_unc, known_var_fully_corr };

/// Partitioned sampler Phi = [Phi_s; Phi_o]. Rows have norm 1/sqrt(M) with
/// M = M1 + M2 (M = M1 for known-variance designs, where Phi_o is empty).
struct MeasurementDesign {
    DesignKind kind = DesignKind::max_uncorrelated;
    Strategy strategy = Strategy::max_uncorrelated;
    bool known_variance = false;
    Matrix phi_s;
    Matrix phi_o;

    int m1() const { return static_cast<int>(phi_s.rows()); }
    int m2() const { return static_cast<int>(phi_o.rows()); }
    int m() const { return m1() + m2(); }
    int n() const { return static_cast<int>(phi_s.cols()); }
    DetectorKind detector_kind() const;
    /// Stacked [Phi_s; Phi_o].
    Matrix phi() const;
};

DetectorKind detector_kind(Strategy strategy, bool known_variance);

/// Candidate measurement columns with M Psi^T Psi = I_R.
struct Dictionary {
    Matrix psi;

    int r() const { return static_cast<int>(psi.cols()); }
    int n() const { return static_cast<int>(psi.rows()); }
    /// Scales unit-norm orthogonal columns to squared norm 1/M.
    static Dictionary from_orthonormal(const Matrix& q, int m);
};

/// Phi_s = Ts U_s^T / sqrt(M), Phi_o = To U_o^T / sqrt(M) with U_s the first
/// M1 and U_o the last M2 left singular vectors of H. Ts and To default to
/// identity and must be orthogonal when supplied.
MeasurementDesign design_max_uncorrelated(const SubspaceModel& model, int m1, int m2,
                                          const std::optional<Matrix>& ts = std::nullopt,
                                          const std::optional<Matrix>& to = std::nullopt);

/// M1 copies of u_1^T / sqrt(M) and M2 copies of u_N^T / sqrt(M).
MeasurementDesign design_fully_correlated(const SubspaceModel& model, int m1, int m2);

/// Phi_s only, scaled with M = M1.
MeasurementDesign design_known_variance(const SubspaceModel& model, int m1, Strategy strategy);

/// Design built from the left singular vectors of P_G^perp H restricted to
/// range(P_G^perp), so that Phi G = 0. A zero-column G gives the plain design.
MeasurementDesign design_with_interference(const SubspaceModel& model, const Matrix& g, int m1,
                                           int m2, Strategy strategy);

/// Selects dictionary columns by their Rayleigh scores psi_r^T H H^T psi_r.
/// With orthogonal columns the trace objective is a sum of per-column
/// scores, so the top (bottom) scores are the exact subset optimum.
/// m2 == 0 builds a known-variance design.
MeasurementDesign design_from_dictionary(const SubspaceModel& model, const Dictionary& dict,
                                         int m1, int m2, Strategy strategy);

/// Rayleigh score of every dictionary column.
Vector dictionary_scores(const SubspaceModel& model, const Dictionary& dict);

/// H_eq = sum_q pi_q H_q H_q^T.
Matrix union_equivalent_matrix(const UnionModel& u);

struct UnionDesign {
    MeasurementDesign design;
    Vector eigenvalues;  // of H_eq, descending
    /// lambda_max(H_eq) == lambda_min(H_eq): no preferred direction exists and
    /// the unknown-variance detectors cannot work.
    bool flat_spectrum = false;
};

/// Strategy applied to the eigenvectors of H_eq in place of the singular
/// vectors of H.
UnionDesign design_union(const UnionModel& u, int m1, int m2, Strategy strategy);

/// Builds a design from an ordered basis (columns sorted by decreasing
/// energy). Shared by every construction above.
MeasurementDesign design_from_basis(const Matrix& basis, int m1, int m2, Strategy strategy,
                                    bool known_variance);

std::string_view to_string(DesignKind kind);
std::string_view to_string(Strategy strategy);
std::string_view to_string(DetectorKind kind);
DesignKind design_kind_from_string(std::string_view s);
Strategy strategy_from_string(std::string_view s);

}  // namespace csd
