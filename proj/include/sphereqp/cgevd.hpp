#pragma once

#include <cstdint>
#include <vector>

#include "sphereqp/linalg.hpp"
#include "sphereqp/qcqp.hpp"

namespace sphereqp::cgevd {

/// min tr(X^T Q X) s.t. X^T B X = I_R where column r of X is constrained to
/// vec(G_r A^T) with shared J x S factor A.
struct Problem {
    Matrix q;  // order I*J, psd
    Matrix b;  // order I*J, pd
    Eigen::Index i_dim = 0;
    Eigen::Index j_dim = 0;
    Eigen::Index r_count = 0;
    Eigen::Index s_rank = 0;
};

struct State {
    std::vector<Matrix> g;  // R factors, each I x S
    Matrix a;               // J x S
    double objective = 0.0;
    double feasibility = 0.0;  // |X^T B X - I_R|_F
    bool stalled = false;
    int sweeps = 0;
};

struct Options {
    int max_sweeps = 100;
    double tol = 1e-8;  // relative objective decrease between sweeps
    std::uint64_t seed = 0;
    double jitter = 1e-12;  // repair for a numerically singular reduced B

    /// A-step solver; the carrier policy applies to the blocks B_{r,r} and
    /// defaults to B_{1,1}. The iteration budget is modest because the
    /// accept-if-better sweep absorbs inexact inner solves.
    static qcqp::Options default_inner() {
        qcqp::Options o;
        o.carrier = qcqp::CarrierPolicy::given_index;
        o.carrier_index = 0;
        o.max_iters = 5000;
        return o;
    }
    qcqp::Options inner = default_inner();
};

/// Column r = vec(G_r A^T) = (A kron I_I) vec(G_r).
Matrix assemble_x(const Problem& p, const State& s);

/// Orthonormalize A (absorbing the factor into every G_r, which leaves X
/// unchanged), then take the R smallest generalized eigenvectors of the
/// reduced pencil (Q_G, B_G).
void update_g(State& s, const Problem& p, double jitter = 1e-12);

/// Re-solve A as a QCQP on vec(A^T) with R(R+1)/2 constraints through the
/// shared sphere-plus-orthogonality core. Keeps the previous A when the new
/// one is worse (accept-if-better); returns false in that case.
bool update_a(State& s, const Problem& p, const qcqp::Options& inner);

State solve(const Problem& p, const Options& opts = {});

}  // namespace sphereqp::cgevd
