#include "csd/design.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace csd {

namespace {

void require_orthogonal(const Matrix& t, int size, const char* name) {
    if (t.rows() != size || t.cols() != size) {
        throw DimensionError(std::string("design: ") + name + " must be " + std::to_string(size) +
                             "x" + std::to_string(size));
    }
    const Matrix gram = t.transpose() * t;
    if ((gram - Matrix::Identity(size, size)).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument(std::string("design: ") + name + " is not orthogonal");
    }
}

Matrix replicate_row(const Eigen::Ref<const Vector>& direction, int copies, double scale) {
    Matrix out(copies, direction.size());
    for (int i = 0; i < copies; ++i) out.row(i) = scale * direction.transpose();
    return out;
}

}  // namespace

DetectorKind detector_kind(Strategy strategy, bool known_variance) {
    if (strategy == Strategy::max_uncorrelated) {
        return known_variance ? DetectorKind::known_var_max_unc : DetectorKind::max_uncorrelated;
    }
    return known_variance ? DetectorKind::known_var_fully_corr : DetectorKind::fully_correlated;
}

DetectorKind MeasurementDesign::detector_kind() const {
    return csd::detector_kind(strategy, known_variance);
}

Matrix MeasurementDesign::phi() const {
    Matrix out(m(), n());
    out.topRows(m1()) = phi_s;
    if (m2() > 0) out.bottomRows(m2()) = phi_o;
    return out;
}

Dictionary Dictionary::from_orthonormal(const Matrix& q, int m) {
    if (m < 1) throw std::invalid_argument("dictionary: M must be >= 1");
    return {q / std::sqrt(static_cast<double>(m))};
}

MeasurementDesign design_from_basis(const Matrix& basis, int m1, int m2, Strategy strategy,
                                    bool known_variance) {
    if (m1 < 1) throw DimensionError("design: M1 must be >= 1");
    if (known_variance && m2 != 0) throw DimensionError("design: known-variance designs have M2 = 0");
    if (!known_variance && m2 < 1) throw DimensionError("design: M2 must be >= 1");
    const int available = static_cast<int>(basis.cols());
    const int m = m1 + m2;
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));

    MeasurementDesign d;
    d.strategy = strategy;
    d.known_variance = known_variance;
    if (strategy == Strategy::max_uncorrelated) {
        if (m > available) {
            throw DimensionError("design: M1 + M2 = " + std::to_string(m) + " exceeds the " +
                                 std::to_string(available) + " available directions");
        }
        d.phi_s = scale * basis.leftCols(m1).transpose();
        d.phi_o = scale * basis.rightCols(m2).transpose();
    } else {
        if (available < (known_variance ? 1 : 2)) {
            throw DimensionError("design: fully-correlated design needs distinct strongest and "
                                 "weakest directions");
        }
        d.phi_s = replicate_row(basis.col(0), m1, scale);
        d.phi_o = replicate_row(basis.col(available - 1), m2, scale);
    }
    if (known_variance) d.phi_o.resize(0, basis.rows());
    return d;
}

MeasurementDesign design_max_uncorrelated(const SubspaceModel& model, int m1, int m2,
                                          const std::optional<Matrix>& ts,
                                          const std::optional<Matrix>& to) {
    if (m1 < 1 || m2 < 1) throw DimensionError("design_max_uncorrelated: M1, M2 must be >= 1");
    if (m1 + m2 > model.n()) {
        throw DimensionError("design_max_uncorrelated: M1 + M2 = " + std::to_string(m1 + m2) +
                             " exceeds N = " + std::to_string(model.n()));
    }
    if (ts) require_orthogonal(*ts, m1, "Ts");
    if (to) require_orthogonal(*to, m2, "To");
    MeasurementDesign d =
        design_from_basis(model.svd.u, m1, m2, Strategy::max_uncorrelated, false);
    d.kind = DesignKind::max_uncorrelated;
    if (ts) d.phi_s = (*ts) * d.phi_s;
    if (to) d.phi_o = (*to) * d.phi_o;
    return d;
}

MeasurementDesign design_fully_correlated(const SubspaceModel& model, int m1, int m2) {
    MeasurementDesign d =
        design_from_basis(model.svd.u, m1, m2, Strategy::fully_correlated, false);
    d.kind = DesignKind::fully_correlated;
    return d;
}

MeasurementDesign design_known_variance(const SubspaceModel& model, int m1, Strategy strategy) {
    MeasurementDesign d = design_from_basis(model.svd.u, m1, 0, strategy, true);
    d.kind = strategy == Strategy::max_uncorrelated ? DesignKind::known_var_max_unc
                                                    : DesignKind::known_var_fully_corr;
    return d;
}

MeasurementDesign design_with_interference(const SubspaceModel& model, const Matrix& g, int m1,
                                           int m2, Strategy strategy) {
    const int n = model.n();
    if (g.rows() != n && g.cols() > 0) {
        throw DimensionError("design_with_interference: G has " + std::to_string(g.rows()) +
                             " rows, expected N = " + std::to_string(n));
    }
    MeasurementDesign d;
    if (g.cols() == 0) {
        d = design_from_basis(model.svd.u, m1, m2, strategy, false);
    } else {
        if (g.cols() >= n) throw RankError("design_with_interference: need K' < N");
        // Left singular vectors of P H that lie in range(P); P v = v for each,
        // so right-multiplying by P and renormalizing only removes roundoff.
        const Matrix complement = orth_complement_basis(g);
        const SvdResult reduced = svd(complement.transpose() * model.h);
        const Matrix p = orth_projector_complement(g);
        Matrix basis = p * (complement * reduced.u);
        basis.colwise().normalize();
        normalize_column_signs(basis);
        d = design_from_basis(basis, m1, m2, strategy, false);
    }
    d.kind = DesignKind::interference;
    return d;
}

Vector dictionary_scores(const SubspaceModel& model, const Dictionary& dict) {
    if (dict.n() != model.n()) {
        throw DimensionError("dictionary: Psi has " + std::to_string(dict.n()) +
                             " rows, expected N = " + std::to_string(model.n()));
    }
    return (model.h.transpose() * dict.psi).colwise().squaredNorm().transpose();
}

MeasurementDesign design_from_dictionary(const SubspaceModel& model, const Dictionary& dict,
                                         int m1, int m2, Strategy strategy) {
    const bool known_variance = m2 == 0;
    const int m = m1 + m2;
    const int r = dict.r();
    if (m1 < 1 || m2 < 0) throw DimensionError("design_from_dictionary: invalid split");
    if (strategy == Strategy::max_uncorrelated && r < m) {
        throw DimensionError("design_from_dictionary: R = " + std::to_string(r) +
                             " is smaller than M = " + std::to_string(m));
    }
    if (strategy == Strategy::fully_correlated && r < (known_variance ? 1 : 2)) {
        throw DimensionError("design_from_dictionary: fully-correlated selection needs two "
                             "distinct columns");
    }
    const Matrix gram = m * (dict.psi.transpose() * dict.psi);
    if ((gram - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("design_from_dictionary: columns must satisfy M Psi^T Psi = I");
    }

    const Vector scores = dictionary_scores(model, dict);
    std::vector<int> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores(a) > scores(b); });

    MeasurementDesign d;
    d.kind = DesignKind::dictionary;
    d.strategy = strategy;
    d.known_variance = known_variance;
    const int n = dict.n();
    if (strategy == Strategy::max_uncorrelated) {
        d.phi_s.resize(m1, n);
        for (int i = 0; i < m1; ++i) d.phi_s.row(i) = dict.psi.col(order[i]).transpose();
        d.phi_o.resize(m2, n);
        for (int i = 0; i < m2; ++i) d.phi_o.row(i) = dict.psi.col(order[r - m2 + i]).transpose();
    } else {
        d.phi_s = replicate_row(dict.psi.col(order.front()), m1, 1.0);
        d.phi_o = replicate_row(dict.psi.col(order.back()), m2, 1.0);
    }
    return d;
}

Matrix union_equivalent_matrix(const UnionModel& u) {
    if (u.members.empty()) throw std::invalid_argument("union_equivalent_matrix: empty union");
    const Eigen::Index n = u.members.front().rows();
    Matrix heq = Matrix::Zero(n, n);
    for (std::size_t q = 0; q < u.members.size(); ++q) {
        const Matrix& h = u.members[q];
        heq.noalias() += u.pi[q] * (h * h.transpose());
    }
    return 0.5 * (heq + heq.transpose());
}

UnionDesign design_union(const UnionModel& u, int m1, int m2, Strategy strategy) {
    const SymEigResult eig = sym_eig(union_equivalent_matrix(u));
    UnionDesign out;
    out.eigenvalues = eig.eigenvalues;
    const double top = eig.eigenvalues(0);
    const double bottom = eig.eigenvalues(eig.eigenvalues.size() - 1);
    out.flat_spectrum = top - bottom <= kRankTolerance * std::max(std::abs(top), 1e-300);
    out.design = design_from_basis(eig.eigenvectors, m1, m2, strategy, false);
    out.design.kind = DesignKind::union_of_subspaces;
    return out;
}

std::string_view to_string(DesignKind kind) {
    switch (kind) {
        case DesignKind::max_uncorrelated: return "max_uncorrelated";
        case DesignKind::fully_correlated: return "fully_correlated";
        case DesignKind::known_var_max_unc: return "known_var_max_unc";
        case DesignKind::known_var_fully_corr: return "known_var_fully_corr";
        case DesignKind::dictionary: return "dictionary";
        case DesignKind::union_of_subspaces: return "union";
        case DesignKind::interference: return "interference";
    }
    return "unknown";
}

std::string_view to_string(Strategy strategy) {
    return strategy == Strategy::max_uncorrelated ? "max_uncorrelated" : "fully_correlated";
}

std::string_view to_string(DetectorKind kind) {
    switch (kind) {
        case DetectorKind::max_uncorrelated: return "max_uncorrelated";
        case DetectorKind::fully_correlated: return "fully_correlated";
        case DetectorKind::known_var_max_unc: return "known_var_max_unc";
        case DetectorKind::known_var_fully_corr: return "known_var_fully_corr";
    }
    return "unknown";
}

DesignKind design_kind_from_string(std::string_view s) {
    for (DesignKind k : {DesignKind::max_uncorrelated, DesignKind::fully_correlated,
                         DesignKind::known_var_max_unc, DesignKind::known_var_fully_corr,
                         DesignKind::dictionary, DesignKind::union_of_subspaces,
                         DesignKind::interference}) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown design kind '" + std::string(s) + "'");
}

Strategy strategy_from_string(std::string_view s) {
    if (s == "max_uncorrelated") return Strategy::max_uncorrelated;
    if (s == "fully_correlated") return Strategy::fully_correlated;
    throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

}  // namespace csd
