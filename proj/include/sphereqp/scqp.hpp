#pragma once

#include <vector>

#include "sphereqp/linalg.hpp"
#include "sphereqp/secular.hpp"

namespace sphereqp::scqp {

enum class Multiplicity { unique, sign_pair, sphere_family };

/// Minimizer of 1/2 x^T Q x + b^T x on the unit sphere.
/// `multiplier` is the Lagrange multiplier: (Q - multiplier*I) x + b == 0.
/// `alternates` lists representative co-minimizers (the other sign of a
/// sign_pair, or a second direction spanning a sphere_family).
struct Solution {
    Vector x;
    double multiplier = 0.0;
    double objective = 0.0;
    Multiplicity multiplicity = Multiplicity::unique;
    std::vector<Vector> alternates;
};

struct Options {
    double zero_tol = 1e-12;  // |c_l| below zero_tol * max(1, |c|_inf) is zero
    double dup_tol = 1e-10;   // s-gaps below dup_tol * max(1, s_K) are merged
    double root_tol = 1e-12;  // secular |f'| target, scaled by K
};

/// Diagonalized, shifted, scaled problem. s_k = (sigma_k - sigma_1)/|b| + 1,
/// c = U^T b / |b|. group_map partitions indices by duplicate s values;
/// zero_index_set lists reduced groups whose combined |c| is negligible.
struct Canonical {
    linalg::Spectrum spectrum;
    double b_norm = 0.0;
    Vector s;
    Vector c;
    std::vector<std::vector<int>> group_map;
    std::vector<int> zero_index_set;
};

/// Throws InvalidInputError when |b| == 0 (callers route that case to the
/// smallest-eigenvector path).
Canonical canonicalize(const Matrix& q, const Vector& b,
                       double zero_tol = 1e-12, double dup_tol = 1e-10);

/// Duplicate-collapsed spectrum: one entry per group of equal s values, with
/// the combined coefficient c_j = |c restricted to group j|.
struct Reduced {
    Vector s;
    Vector c;  // nonnegative; zero entries correspond to zero_index_set
};

Reduced reduce_duplicates(const Canonical& canon);

Solution solve(const Matrix& q, const Vector& b, const Options& opts = {});

/// Same minimization with a precomputed eigenvalue decomposition of Q.
Solution solve_with_evd(const linalg::Spectrum& spectrum, const Vector& b,
                        const Options& opts = {});

/// Minimizer subject to |x| <= 1, handled through the slack-expanded
/// equality problem on blkdiag(0, Q).
Solution solve_inequality(const Matrix& q, const Vector& b,
                          const Options& opts = {});

/// Minimizer of 1/2 tr(X^T Q X) + tr(B^T X) over |X|_F = 1, reduced to a
/// dim(Q)-sized sphere problem through c_i = |B^T u_i|.
struct MatrixSolution {
    Matrix x;
    double objective = 0.0;
};

MatrixSolution solve_matrix(const Matrix& q, const Matrix& b,
                            const Options& opts = {});

}  // namespace sphereqp::scqp
