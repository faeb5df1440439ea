#include "csd/spectral.hpp"

#include "csd/errors.hpp"

#include <algorithm>
#include <string>

namespace csd {

namespace {

std::string dims(const Matrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

Eigen::Index largest_magnitude_index(const Eigen::Ref<const Vector>& v) {
    Eigen::Index idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    return idx;
}

}  // namespace

void normalize_column_signs(Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m(largest_magnitude_index(m.col(j)), j) < 0.0) m.col(j) = -m.col(j);
    }
}

bool is_symmetric(const Matrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

SvdResult svd(const Matrix& a) {
    if (a.size() == 0) throw DimensionError("svd: empty matrix");
    if (!a.allFinite()) throw NumericalError("svd: non-finite entry in " + dims(a) + " input");
    Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("svd: decomposition of " + dims(a) + " matrix did not converge");
    }
    SvdResult out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    const Eigen::Index rank = out.singular_values.size();
    for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
        if (out.u(largest_magnitude_index(out.u.col(j)), j) >= 0.0) continue;
        out.u.col(j) = -out.u.col(j);
        if (j < rank) out.v.col(j) = -out.v.col(j);
    }
    // Right vectors without a paired left vector (cols > rows) get the same rule.
    for (Eigen::Index j = rank; j < out.v.cols(); ++j) {
        if (out.v(largest_magnitude_index(out.v.col(j)), j) < 0.0) out.v.col(j) = -out.v.col(j);
    }
    return out;
}

SymEigResult sym_eig(const Matrix& a) {
    if (a.rows() == 0 || a.rows() != a.cols()) {
        throw DimensionError("sym_eig: expected a non-empty square matrix, got " + dims(a));
    }
    if (!is_symmetric(a, 1e-10)) throw std::invalid_argument("sym_eig: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("sym_eig: decomposition of " + dims(a) + " matrix did not converge");
    }
    // Eigen returns ascending order.
    SymEigResult out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
    normalize_column_signs(out.eigenvectors);
    return out;
}

Matrix orth_projector_complement(const Matrix& g) {
    const Eigen::Index n = g.rows();
    if (g.cols() == 0) return Matrix::Identity(n, n);
    if (g.cols() > n) throw RankError("orth_projector_complement: more columns than rows");
    const Vector s = Eigen::JacobiSVD<Matrix>(g).singularValues();
    if (!(s(s.size() - 1) > kRankTolerance * s(0))) {
        throw RankError("orth_projector_complement: G (" + dims(g) +
                        ") is not full column rank");
    }
    const Matrix gram = g.transpose() * g;
    Matrix p = Matrix::Identity(n, n) - g * gram.ldlt().solve(g.transpose());
    return 0.5 * (p + p.transpose());
}

Matrix orth_complement_basis(const Matrix& g) {
    const Eigen::Index n = g.rows();
    if (g.cols() == 0) return Matrix::Identity(n, n);
    const SvdResult dec = svd(g);
    const Vector& s = dec.singular_values;
    if (g.cols() > n || !(s(s.size() - 1) > kRankTolerance * s(0))) {
        throw RankError("orth_complement_basis: G (" + dims(g) + ") is not full column rank");
    }
    return dec.u.rightCols(n - g.cols());
}

double captured_energy(const Matrix& phi, const Matrix& h) {
    if (phi.cols() != h.rows()) {
        throw DimensionError("captured_energy: Phi is " + dims(phi) + ", H is " + dims(h));
    }
    return (phi * h).squaredNorm();
}

}  // namespace csd
