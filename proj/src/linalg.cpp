#include "sphereqp/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace sphereqp::linalg {

namespace {

void require_finite(const Matrix& m, const char* who) {
    if (!m.allFinite()) {
        throw InvalidInputError(std::string(who) + ": input has non-finite entries");
    }
}

}  // namespace

Matrix symmetrized(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

Spectrum sym_evd(const Matrix& m) {
    require_finite(m, "sym_evd");
    if (m.rows() != m.cols()) {
        throw InvalidInputError("sym_evd: matrix must be square");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
    if (es.info() != Eigen::Success) {
        throw InvalidInputError("sym_evd: eigenvalue decomposition failed");
    }
    return Spectrum{es.eigenvalues(), es.eigenvectors()};
}

Matrix cholesky(const Matrix& m, double jitter) {
    require_finite(m, "cholesky");
    if (m.rows() != m.cols()) {
        throw InvalidInputError("cholesky: matrix must be square");
    }
    Matrix a = symmetrized(m);
    if (jitter > 0.0) {
        const double scale = a.trace() / static_cast<double>(a.rows());
        a += jitter * scale * Matrix::Identity(a.rows(), a.cols());
    }
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefiniteError("cholesky: matrix is not positive definite");
    }
    return llt.matrixL();
}

ThinSvd thin_svd(const Matrix& a) {
    require_finite(a, "thin_svd");
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return ThinSvd{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Matrix orthonormal_basis(const Matrix& columns, double tol) {
    require_finite(columns, "orthonormal_basis");
    if (columns.size() == 0) {
        return Matrix(columns.rows(), 0);
    }
    ThinSvd svd = thin_svd(columns);
    const double smax = svd.singular_values.size() > 0 ? svd.singular_values(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < svd.singular_values.size() && svd.singular_values(rank) > tol * smax) {
        ++rank;
    }
    if (smax == 0.0) {
        rank = 0;
    }
    return svd.u.leftCols(rank);
}

double condition_number(const Matrix& m) {
    Spectrum spec = sym_evd(m);
    const double largest = spec.eigenvalues(spec.eigenvalues.size() - 1);
    const double smallest = spec.eigenvalues(0);
    if (largest <= 0.0) {
        throw InvalidInputError("condition_number: matrix has no positive eigenvalue");
    }
    // Anything below machine precision relative to the largest eigenvalue is
    // indistinguishable from zero; 1e-30 guards denormal survivors.
    if (smallest <= largest * std::numeric_limits<double>::epsilon() || smallest <= 1e-30) {
        return std::numeric_limits<double>::infinity();
    }
    return largest / smallest;
}

}  // namespace sphereqp::linalg
