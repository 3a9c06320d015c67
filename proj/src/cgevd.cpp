#include "sphereqp/cgevd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sphereqp::cgevd {

namespace {

Matrix kron_with_identity_right(const Matrix& a, Eigen::Index i_dim) {
    // A kron I_I for A of size J x S.
    Matrix out = Matrix::Zero(a.rows() * i_dim, a.cols() * i_dim);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            out.block(r * i_dim, c * i_dim, i_dim, i_dim) =
                a(r, c) * Matrix::Identity(i_dim, i_dim);
        }
    }
    return out;
}

Matrix kron_identity_left(Eigen::Index j_dim, const Matrix& g) {
    // I_J kron G for G of size I x S: block diagonal with J copies.
    Matrix out = Matrix::Zero(j_dim * g.rows(), j_dim * g.cols());
    for (Eigen::Index j = 0; j < j_dim; ++j) {
        out.block(j * g.rows(), j * g.cols(), g.rows(), g.cols()) = g;
    }
    return out;
}

void validate(const Problem& p) {
    const Eigen::Index n = p.i_dim * p.j_dim;
    if (p.q.rows() != n || p.q.cols() != n || p.b.rows() != n || p.b.cols() != n) {
        throw InvalidInputError("cgevd: Q and B must have order I*J");
    }
    if (p.r_count < 1 || p.s_rank < 1 || p.s_rank > p.j_dim ||
        p.r_count > p.i_dim * p.s_rank) {
        throw InvalidInputError("cgevd: invalid R or S");
    }
}

double feasibility_of(const Problem& p, const Matrix& x) {
    const Matrix gram = x.transpose() * p.b * x;
    return (gram - Matrix::Identity(p.r_count, p.r_count)).norm();
}

}  // namespace

Matrix assemble_x(const Problem& p, const State& s) {
    Matrix x(p.i_dim * p.j_dim, p.r_count);
    for (Eigen::Index r = 0; r < p.r_count; ++r) {
        const Matrix prod = s.g[static_cast<size_t>(r)] * s.a.transpose();
        x.col(r) = Eigen::Map<const Vector>(prod.data(), prod.size());
    }
    return x;
}

void update_g(State& s, const Problem& p, double jitter) {
    validate(p);
    // Absorb A's QR factor into G so orthonormalizing A leaves X unchanged.
    Eigen::HouseholderQR<Matrix> qr(s.a);
    const Matrix q_thin =
        qr.householderQ() * Matrix::Identity(p.j_dim, p.s_rank);
    const Matrix r_fact = q_thin.transpose() * s.a;
    s.a = q_thin;
    for (auto& g : s.g) g = g * r_fact.transpose();

    const Matrix lift = kron_with_identity_right(s.a, p.i_dim);
    const Matrix q_g = linalg::symmetrized(lift.transpose() * p.q * lift);
    Matrix b_g = linalg::symmetrized(lift.transpose() * p.b * lift);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(q_g, b_g);
    if (ges.info() != Eigen::Success) {
        const double scale = b_g.trace() / static_cast<double>(b_g.rows());
        b_g += jitter * scale * Matrix::Identity(b_g.rows(), b_g.cols());
        ges.compute(q_g, b_g);
        if (ges.info() != Eigen::Success) {
            throw NotPositiveDefiniteError(
                "cgevd: reduced metric is numerically singular");
        }
    }
    // Eigen normalizes v^T B_G v = 1 with ascending eigenvalues.
    for (Eigen::Index r = 0; r < p.r_count; ++r) {
        const Vector g_vec = ges.eigenvectors().col(r);
        s.g[static_cast<size_t>(r)] =
            Eigen::Map<const Matrix>(g_vec.data(), p.i_dim, p.s_rank);
    }
    const Matrix x = assemble_x(p, s);
    s.objective = (x.transpose() * p.q * x).trace();
    s.feasibility = feasibility_of(p, x);
}

bool update_a(State& s, const Problem& p, const qcqp::Options& inner) {
    validate(p);
    const Eigen::Index r_count = p.r_count;
    std::vector<Matrix> lifts;
    for (Eigen::Index r = 0; r < r_count; ++r) {
        lifts.push_back(kron_identity_left(p.j_dim, s.g[static_cast<size_t>(r)]));
    }
    Matrix q_a = Matrix::Zero(p.j_dim * p.s_rank, p.j_dim * p.s_rank);
    for (const Matrix& lift : lifts) {
        q_a += lift.transpose() * p.q * lift;
    }
    q_a = linalg::symmetrized(q_a);
    std::vector<std::vector<Matrix>> b_blocks(static_cast<size_t>(r_count));
    for (Eigen::Index r = 0; r < r_count; ++r) {
        for (Eigen::Index c = 0; c <= r; ++c) {
            b_blocks[static_cast<size_t>(r)].push_back(
                lifts[static_cast<size_t>(r)].transpose() * p.b *
                lifts[static_cast<size_t>(c)]);
        }
    }

    // Carrier over the diagonal blocks B_{r,r}; default is B_{1,1}.
    std::vector<Matrix> diag_blocks;
    for (Eigen::Index r = 0; r < r_count; ++r) {
        diag_blocks.push_back(
            linalg::symmetrized(b_blocks[static_cast<size_t>(r)][static_cast<size_t>(r)]));
    }
    qcqp::Options carrier_opts = inner;
    if (carrier_opts.carrier == qcqp::CarrierPolicy::given_index) {
        carrier_opts.carrier_index =
            std::min<int>(carrier_opts.carrier_index,
                          static_cast<int>(diag_blocks.size()) - 1);
    }
    qcqp::CarrierSelection sel;
    try {
        sel = qcqp::select_sphere_matrix(diag_blocks, carrier_opts);
    } catch (const NotPositiveDefiniteError&) {
        // The preferred block can be singular when a G_r lost rank; fall
        // back to the best-conditioned block, or skip the update entirely.
        qcqp::Options fallback = carrier_opts;
        fallback.carrier = qcqp::CarrierPolicy::min_condition;
        try {
            sel = qcqp::select_sphere_matrix(diag_blocks, fallback);
        } catch (const NotPositiveDefiniteError&) {
            return false;
        }
    }
    const Matrix f = linalg::cholesky(sel.carrier, inner.jitter);
    const auto tri = f.triangularView<Eigen::Lower>();
    auto whiten = [&](const Matrix& m) {
        Matrix half = tri.solve(linalg::symmetrized(m));
        return linalg::symmetrized(tri.solve(half.transpose()).transpose());
    };
    const Matrix q_t = whiten(q_a);
    std::vector<Matrix> d_t;
    for (Eigen::Index r = 0; r < r_count; ++r) {
        const Matrix diff = sel.carrier - diag_blocks[static_cast<size_t>(r)];
        if (diff.norm() > 0.0) d_t.push_back(whiten(diff));
    }
    for (Eigen::Index r = 1; r < r_count; ++r) {
        for (Eigen::Index c = 0; c < r; ++c) {
            const Matrix& cross =
                b_blocks[static_cast<size_t>(r)][static_cast<size_t>(c)];
            d_t.push_back(whiten(cross + cross.transpose()));
        }
    }

    // Warm start from the current feasible A.
    const Matrix at = s.a.transpose();
    Vector a_vec = Eigen::Map<const Vector>(at.data(), at.size());
    Vector x0 = f.transpose() * a_vec;
    const double x0_norm = x0.norm();
    if (x0_norm > 0.0) x0 /= x0_norm;

    qcqp::Result inner_res =
        qcqp::solve_core(q_t, Vector::Zero(q_t.rows()), d_t, carrier_opts, &x0);
    const Vector a_new_vec =
        f.transpose().triangularView<Eigen::Upper>().solve(inner_res.x);
    const Matrix a_new = Eigen::Map<const Matrix>(a_new_vec.data(), p.s_rank,
                                                  p.j_dim)
                             .transpose();

    State candidate = s;
    candidate.a = a_new;
    const Matrix x = assemble_x(p, candidate);
    candidate.objective = (x.transpose() * p.q * x).trace();
    candidate.feasibility = feasibility_of(p, x);
    const bool better =
        candidate.objective <= s.objective + 1e-12 * (1.0 + std::abs(s.objective)) &&
        candidate.feasibility <= std::max(s.feasibility, 1e-6) + 1e-8;
    if (better) {
        s = candidate;
        return true;
    }
    return false;
}

State solve(const Problem& p, const Options& opts) {
    validate(p);
    State state;
    state.g.assign(static_cast<size_t>(p.r_count), Matrix::Zero(p.i_dim, p.s_rank));
    // Random orthonormal start for A.
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix a0(p.j_dim, p.s_rank);
    for (Eigen::Index r = 0; r < p.j_dim; ++r) {
        for (Eigen::Index c = 0; c < p.s_rank; ++c) a0(r, c) = gauss(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(a0);
    state.a = qr.householderQ() * Matrix::Identity(p.j_dim, p.s_rank);

    update_g(state, p, opts.jitter);
    double prev = state.objective;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        state.sweeps = sweep + 1;
        const bool accepted = update_a(state, p, opts.inner);
        update_g(state, p, opts.jitter);
        if (!accepted) {
            state.stalled = true;
            break;
        }
        state.stalled = false;
        if (prev - state.objective < opts.tol * (1.0 + std::abs(prev))) {
            break;
        }
        prev = state.objective;
    }
    return state;
}

}  // namespace sphereqp::cgevd
