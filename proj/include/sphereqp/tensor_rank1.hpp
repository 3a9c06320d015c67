#pragma once

#include <cstdint>
#include <vector>

#include "sphereqp/linalg.hpp"

namespace sphereqp::tensor_rank1 {

/// Order-4 fully symmetric tensor stored as its mode-(1,2) matricization:
/// qmat(i1*I+i2, i3*I+i4) = y(i1,i2,i3,i4).
struct SymTensor4 {
    Eigen::Index dim = 0;
    Matrix qmat;

    double frobenius_sq() const { return qmat.squaredNorm(); }
    /// <Y, x o x o x o x> = (x kron x)^T qmat (x kron x).
    double inner_outer_power(const Vector& x) const;
    /// <Y, . o x o x o x>: the gradient direction used by power iterations.
    Vector contract3(const Vector& x) const;
};

/// Average a raw I^4 array (index ((i1*I+i2)*I+i3)*I+i4) over all 24 index
/// permutations; optionally scale to unit Frobenius norm.
SymTensor4 symmetrize(const std::vector<double>& raw, Eigen::Index dim,
                      bool unit_norm = false);

/// Wrap an existing matricization, verifying the permutation symmetries.
SymTensor4 from_matricization(const Matrix& qmat, double sym_tol = 1e-10);

struct Rank1Result {
    double weight = 0.0;  // lambda = <Y, x^(4)>
    Vector direction;     // unit
    double error = 0.0;   // |Y - lambda x^(4)|_F^2
    bool converged = false;
    int iterations = 0;
};

struct Options {
    double gamma = 1.0;
    bool adapt_gamma = true;
    double alpha_step = 2.0;
    int stall_window = 50;
    double stall_improvement = 0.01;
    int max_iters = 20000;
    double tol = 1e-10;  // primal residual |z - x kron x|
};

/// Splitting solver: z-update is a sphere QP on the fixed spectrum of
/// +-qmat, x-update the leading eigenvector of the reshaped consensus
/// matrix. Both sign branches run; the larger |lambda| wins.
Rank1Result best_rank1(const SymTensor4& t, const Options& opts = {});

double residual(const SymTensor4& t, double weight, const Vector& x);

/// Shifted symmetric higher-order power method from a given start.
Vector power_iteration(const SymTensor4& t, const Vector& x0, double sign,
                       int max_iters = 500, double tol = 1e-13);

/// Multi-restart power baseline used as a benchmark reference.
Rank1Result best_rank1_power(const SymTensor4& t, int restarts,
                             std::uint64_t seed, int max_iters = 500);

}  // namespace sphereqp::tensor_rank1
