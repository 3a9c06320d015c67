#include "sphereqp/tensor_rank1.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "sphereqp/scqp.hpp"

namespace sphereqp::tensor_rank1 {

namespace {

Vector kron_self(const Vector& x) {
    const Eigen::Index n = x.size();
    Vector out(n * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.segment(i * n, n) = x(i) * x;
    }
    return out;
}

double tensor_entry(const Matrix& qmat, Eigen::Index dim, Eigen::Index i,
                    Eigen::Index j, Eigen::Index k, Eigen::Index l) {
    return qmat(i * dim + j, k * dim + l);
}

}  // namespace

double SymTensor4::inner_outer_power(const Vector& x) const {
    const Vector xx = kron_self(x);
    return xx.dot(qmat * xx);
}

Vector SymTensor4::contract3(const Vector& x) const {
    const Vector w = qmat * kron_self(x);
    Vector g = Vector::Zero(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        g(i) = w.segment(i * dim, dim).dot(x);
    }
    return g;
}

SymTensor4 symmetrize(const std::vector<double>& raw, Eigen::Index dim,
                      bool unit_norm) {
    if (static_cast<Eigen::Index>(raw.size()) != dim * dim * dim * dim) {
        throw InvalidInputError("symmetrize: raw array size must be dim^4");
    }
    auto at = [&](Eigen::Index a, Eigen::Index b, Eigen::Index c,
                  Eigen::Index d) {
        return raw[static_cast<size_t>(((a * dim + b) * dim + c) * dim + d)];
    };
    SymTensor4 t;
    t.dim = dim;
    t.qmat = Matrix(dim * dim, dim * dim);
    std::array<int, 4> perm{0, 1, 2, 3};
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index k = 0; k < dim; ++k) {
                for (Eigen::Index l = 0; l < dim; ++l) {
                    const std::array<Eigen::Index, 4> idx{i, j, k, l};
                    double acc = 0.0;
                    perm = {0, 1, 2, 3};
                    do {
                        acc += at(idx[perm[0]], idx[perm[1]], idx[perm[2]],
                                  idx[perm[3]]);
                    } while (std::next_permutation(perm.begin(), perm.end()));
                    t.qmat(i * dim + j, k * dim + l) = acc / 24.0;
                }
            }
        }
    }
    if (unit_norm) {
        const double norm = t.qmat.norm();
        if (norm > 0.0) t.qmat /= norm;
    }
    return t;
}

SymTensor4 from_matricization(const Matrix& qmat, double sym_tol) {
    const Eigen::Index n2 = qmat.rows();
    const auto dim = static_cast<Eigen::Index>(std::llround(std::sqrt(
        static_cast<double>(n2))));
    if (dim * dim != n2 || qmat.cols() != n2) {
        throw InvalidInputError("from_matricization: matrix must be I^2 x I^2");
    }
    const double scale = std::max(1.0, qmat.cwiseAbs().maxCoeff());
    // The transpositions (12), (23), (34) generate all 24 symmetries.
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index k = 0; k < dim; ++k) {
                for (Eigen::Index l = 0; l < dim; ++l) {
                    const double base = tensor_entry(qmat, dim, i, j, k, l);
                    if (std::abs(base - tensor_entry(qmat, dim, j, i, k, l)) >
                            sym_tol * scale ||
                        std::abs(base - tensor_entry(qmat, dim, i, k, j, l)) >
                            sym_tol * scale ||
                        std::abs(base - tensor_entry(qmat, dim, i, j, l, k)) >
                            sym_tol * scale) {
                        throw InvalidInputError(
                            "from_matricization: tensor is not symmetric");
                    }
                }
            }
        }
    }
    SymTensor4 t;
    t.dim = dim;
    t.qmat = linalg::symmetrized(qmat);
    return t;
}

double residual(const SymTensor4& t, double weight, const Vector& x) {
    return t.frobenius_sq() + weight * weight -
           2.0 * weight * t.inner_outer_power(x);
}

namespace {

Vector initial_direction(const SymTensor4& t) {
    // Partial trace C(i,k) = sum_j y(i,j,k,j): its dominant eigenvector is a
    // cheap proxy for the principal rank-1 direction.
    const Eigen::Index dim = t.dim;
    Matrix c = Matrix::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index k = 0; k < dim; ++k) {
            for (Eigen::Index j = 0; j < dim; ++j) {
                c(i, k) += tensor_entry(t.qmat, dim, i, j, k, j);
            }
        }
    }
    const linalg::Spectrum spec = linalg::sym_evd(c);
    const Eigen::Index last = spec.eigenvalues.size() - 1;
    const Eigen::Index pick =
        std::abs(spec.eigenvalues(0)) > std::abs(spec.eigenvalues(last)) ? 0 : last;
    return spec.eigenvectors.col(pick);
}

struct BranchResult {
    Vector x;
    double lambda = 0.0;
    bool converged = false;
    int iterations = 0;
};

// One sign branch: minimize sign * z^T qmat z over z = x kron x, |x| = 1.
// `spec` is the eigendecomposition of sign * 2 * qmat, shared across starts.
BranchResult run_branch(const SymTensor4& t, const linalg::Spectrum& spec,
                        const Vector& x0, const Options& opts) {
    const Eigen::Index dim = t.dim;
    const Eigen::Index n2 = dim * dim;

    double gamma = opts.gamma;
    Vector x = x0;
    Vector z = kron_self(x);
    Vector y = Vector::Zero(n2);

    BranchResult best;
    best.x = x;
    best.lambda = t.inner_outer_power(x);
    double best_primal = std::numeric_limits<double>::infinity();
    double ref_primal = std::numeric_limits<double>::infinity();
    double window_primal = std::numeric_limits<double>::infinity();
    int window_start = 0;

    for (int it = 0; it < opts.max_iters; ++it) {
        const Vector xx = kron_self(x);
        // z-update: sphere QP with the branch's fixed spectrum shifted by
        // gamma (a constant on the sphere) and linear term y - gamma*xx.
        const Vector lin = y - gamma * xx;
        if (lin.norm() > 0.0) {
            z = scqp::solve_with_evd(spec, lin).x;
        } else {
            z = spec.eigenvectors.col(0);
        }
        // x-update: leading eigenvector of the reshaped consensus matrix.
        const Vector t_vec = z + y / gamma;
        const Matrix t_s = linalg::symmetrized(
            Eigen::Map<const Matrix>(t_vec.data(), dim, dim));
        const linalg::Spectrum ts_spec = linalg::sym_evd(t_s);
        x = ts_spec.eigenvectors.col(dim - 1);
        const Vector xx_new = kron_self(x);
        const Vector z_prev = z;
        y += gamma * (z - xx_new);

        const double primal = (z - xx_new).norm();
        const double dual = gamma * (z - z_prev).norm();
        best.iterations = it + 1;
        if (primal < best_primal) {
            best_primal = primal;
            best.x = x;
            best.lambda = t.inner_outer_power(x);
        }
        if (primal <= opts.tol) {
            best.x = x;
            best.lambda = t.inner_outer_power(x);
            best.converged = true;
            break;
        }
        if (opts.adapt_gamma) {
            window_primal = std::min(window_primal, primal);
            if (it - window_start + 1 >= opts.stall_window) {
                const bool stalled =
                    window_primal > (1.0 - opts.stall_improvement) * ref_primal;
                if (stalled && std::isfinite(ref_primal)) {
                    if (primal >= dual) {
                        gamma *= opts.alpha_step;
                    } else {
                        gamma /= opts.alpha_step;
                    }
                }
                ref_primal = window_primal;
                window_primal = std::numeric_limits<double>::infinity();
                window_start = it + 1;
            }
        }
    }
    return best;
}

}  // namespace

namespace {

// Deterministic start set per branch: the partial-trace direction, the
// dominant direction of the branch's best z reshaped back to I space, and a
// few fixed-seed random draws. Random tensors have many shallow optima, so
// a single start loses too often.
std::vector<Vector> branch_starts(const SymTensor4& t,
                                  const linalg::Spectrum& spec, double sign) {
    const Eigen::Index dim = t.dim;
    std::vector<Vector> starts;
    starts.push_back(initial_direction(t));
    const Vector z_best = spec.eigenvectors.col(0);
    const Matrix reshaped = linalg::symmetrized(
        Eigen::Map<const Matrix>(z_best.data(), dim, dim));
    const linalg::Spectrum rs = linalg::sym_evd(reshaped);
    const Eigen::Index last = rs.eigenvalues.size() - 1;
    starts.push_back(rs.eigenvectors.col(
        std::abs(rs.eigenvalues(0)) > std::abs(rs.eigenvalues(last)) ? 0 : last));
    std::mt19937_64 rng(sign > 0.0 ? 1234567ull : 7654321ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 3; ++r) {
        Vector x(dim);
        for (Eigen::Index i = 0; i < dim; ++i) x(i) = gauss(rng);
        starts.push_back(x / x.norm());
    }
    return starts;
}

BranchResult best_branch(const SymTensor4& t, double sign, const Options& opts) {
    const linalg::Spectrum spec = linalg::sym_evd(sign * 2.0 * t.qmat);
    BranchResult best;
    bool first = true;
    for (const Vector& x0 : branch_starts(t, spec, sign)) {
        BranchResult cand = run_branch(t, spec, x0, opts);
        const bool improves = sign > 0.0 ? cand.lambda < best.lambda
                                         : cand.lambda > best.lambda;
        if (first || improves) {
            const int seen = first ? 0 : best.iterations;
            best = cand;
            best.iterations += seen;
            first = false;
        } else {
            best.iterations += cand.iterations;
        }
    }
    return best;
}

}  // namespace

Rank1Result best_rank1(const SymTensor4& t, const Options& opts) {
    BranchResult pos = best_branch(t, 1.0, opts);   // most negative lambda
    BranchResult neg = best_branch(t, -1.0, opts);  // most positive lambda
    // Local power polish: the splitting iteration lands near a stationary
    // point, the polish drives |lambda| to the nearby local optimum.
    for (BranchResult* branch : {&pos, &neg}) {
        const double sign = branch->lambda >= 0.0 ? 1.0 : -1.0;
        const Vector polished = power_iteration(t, branch->x, sign);
        const double lambda = t.inner_outer_power(polished);
        if (std::abs(lambda) > std::abs(branch->lambda)) {
            branch->x = polished;
            branch->lambda = lambda;
        }
    }
    const BranchResult& winner =
        std::abs(pos.lambda) >= std::abs(neg.lambda) ? pos : neg;
    Rank1Result res;
    res.weight = winner.lambda;
    res.direction = winner.x;
    res.error = residual(t, res.weight, res.direction);
    res.converged = winner.converged;
    res.iterations = pos.iterations + neg.iterations;
    return res;
}

Vector power_iteration(const SymTensor4& t, const Vector& x0, double sign,
                       int max_iters, double tol) {
    // Shifted power step keeps the iteration monotone for either sign.
    const double shift = 2.0 * t.qmat.norm() + 1.0;
    Vector x = x0 / x0.norm();
    for (int it = 0; it < max_iters; ++it) {
        Vector next = sign * t.contract3(x) + shift * x;
        const double norm = next.norm();
        if (norm == 0.0) break;
        next /= norm;
        if ((next - x).norm() < tol) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

Rank1Result best_rank1_power(const SymTensor4& t, int restarts,
                             std::uint64_t seed, int max_iters) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Rank1Result best;
    best.direction = initial_direction(t);
    best.weight = 0.0;
    for (int r = 0; r < restarts; ++r) {
        Vector x0(t.dim);
        if (r == 0) {
            x0 = initial_direction(t);
        } else {
            for (Eigen::Index i = 0; i < t.dim; ++i) x0(i) = gauss(rng);
        }
        for (double sign : {1.0, -1.0}) {
            const Vector x = power_iteration(t, x0, sign, max_iters);
            const double lambda = t.inner_outer_power(x);
            if (std::abs(lambda) > std::abs(best.weight)) {
                best.weight = lambda;
                best.direction = x;
            }
        }
    }
    best.error = residual(t, best.weight, best.direction);
    best.converged = true;
    return best;
}

}  // namespace sphereqp::tensor_rank1
