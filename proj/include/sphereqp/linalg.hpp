#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace sphereqp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NotPositiveDefiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_iterate(best) {}
    double best_iterate;
};

namespace linalg {

/// Eigenvalue decomposition of a symmetric matrix.
/// Eigenvalues are ascending; eigenvector columns are orthonormal.
struct Spectrum {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// (M + M^T)/2. All symmetric inputs are passed through this before use.
Matrix symmetrized(const Matrix& m);

/// Symmetric EVD. Throws InvalidInputError on non-finite or non-square input.
Spectrum sym_evd(const Matrix& m);

/// Lower-triangular factor F with F F^T == M.
/// If jitter > 0, solves on M + jitter*(trace(M)/n)*I instead (explicit
/// repair for numerically semidefinite inputs).
/// Throws NotPositiveDefiniteError when the factorization fails.
Matrix cholesky(const Matrix& m, double jitter = 0.0);

struct ThinSvd {
    Matrix u;                // orthonormal columns
    Vector singular_values;  // descending
    Matrix v;                // orthonormal columns
};

ThinSvd thin_svd(const Matrix& a);

/// Orthonormal basis of the numerically significant column span of `columns`.
/// Rank is decided by singular values > tol * max singular value.
/// An all-zero input yields a matrix with zero columns.
Matrix orthonormal_basis(const Matrix& columns, double tol = 1e-12);

/// Ratio of extreme eigenvalues of a symmetric psd matrix.
/// Returns +infinity when the smallest eigenvalue is numerically nonpositive.
/// Throws InvalidInputError on a zero matrix.
double condition_number(const Matrix& m);

}  // namespace linalg
}  // namespace sphereqp
