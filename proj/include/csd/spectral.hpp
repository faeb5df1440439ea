#pragma once

#include <Eigen/Dense>

namespace csd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Relative tolerance for every rank decision in the library.
inline constexpr double kRankTolerance = 1e-10;

/// Full SVD A = U diag(s) V^T with U square (rows x rows) and V square
/// (cols x cols). Singular values descend; each singular-vector pair is
/// signed so the largest-magnitude entry of the left vector is positive.
/// Left vectors beyond min(rows, cols) span the left null space and carry
/// implicit singular value zero.
struct SvdResult {
    Matrix u;
    Vector singular_values;
    Matrix v;
};

SvdResult svd(const Matrix& a);

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending.
struct SymEigResult {
    Vector eigenvalues;
    Matrix eigenvectors;
};

SymEigResult sym_eig(const Matrix& a);

/// P = I - G (G^T G)^{-1} G^T. A zero-column G yields the identity.
Matrix orth_projector_complement(const Matrix& g);

/// Orthonormal basis (columns) of the orthogonal complement of range(G).
Matrix orth_complement_basis(const Matrix& g);

/// trace(H H^T Phi^T Phi) = ||Phi H||_F^2, the expected signal energy captured
/// by the rows of Phi per unit signal variance.
double captured_energy(const Matrix& phi, const Matrix& h);

/// Flips the sign of each column so its largest-magnitude entry is positive.
void normalize_column_signs(Matrix& m);

bool is_symmetric(const Matrix& a, double tol);

}  // namespace csd
