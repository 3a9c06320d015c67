#include "sphereqp/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sphereqp/scqp.hpp"

namespace sphereqp::qcqp {

namespace {

Vector vec(const Matrix& m) {
    return Eigen::Map<const Vector>(m.data(), m.size());
}

bool numerically_pd(const Matrix& m) {
    const linalg::Spectrum spec = linalg::sym_evd(m);
    const double top = spec.eigenvalues(spec.eigenvalues.size() - 1);
    return top > 0.0 && spec.eigenvalues(0) > 1e-12 * top;
}

Vector project_simplex(const Vector& v) {
    // Euclidean projection onto {a >= 0, sum a = 1}.
    const Eigen::Index m = v.size();
    std::vector<double> u(v.data(), v.data() + m);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        cumulative += u[static_cast<size_t>(i)];
        const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<size_t>(i)] - t > 0.0) theta = t;
    }
    return (v.array() - theta).max(0.0);
}

Vector min_norm_kkt(const Matrix& g_sub) {
    // Minimize a^T G a over sum a = 1 with G possibly singular: complete
    // orthogonal decomposition of the KKT system gives the minimum-norm
    // multiplier-augmented solution, which splits ties symmetrically.
    const Eigen::Index m = g_sub.rows();
    Matrix kkt = Matrix::Zero(m + 1, m + 1);
    kkt.topLeftCorner(m, m) = g_sub;
    kkt.topRightCorner(m, 1).setConstant(1.0);
    kkt.bottomLeftCorner(1, m).setConstant(1.0);
    Vector rhs = Vector::Zero(m + 1);
    rhs(m) = 1.0;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(kkt);
    Vector sol = cod.solve(rhs);
    return sol.head(m);
}

}  // namespace

std::pair<Matrix, Vector> generate_psd_combination(const std::vector<Matrix>& h) {
    const int m_count = static_cast<int>(h.size());
    if (m_count == 0) {
        throw InvalidInputError("generate_psd_combination: empty constraint set");
    }
    const Eigen::Index k = h[0].rows();
    Matrix w(k * k, m_count);
    for (int m = 0; m < m_count; ++m) {
        if (h[m].rows() != k || h[m].cols() != k) {
            throw InvalidInputError("generate_psd_combination: dimension mismatch");
        }
        w.col(m) = vec(linalg::symmetrized(h[m]));
    }
    const Matrix g = w.transpose() * w;
    Vector alpha;
    if (m_count == 1) {
        alpha = Vector::Ones(1);
    } else if (m_count <= 12) {
        // Enumerate supports largest-first so flat directions resolve to the
        // symmetric minimum-norm weights.
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> idx;
        for (int size = m_count; size >= 1; --size) {
            std::vector<int> mask(m_count, 0);
            std::fill(mask.begin(), mask.begin() + size, 1);
            do {
                idx.clear();
                for (int i = 0; i < m_count; ++i) {
                    if (mask[i]) idx.push_back(i);
                }
                Matrix g_sub(size, size);
                for (int r = 0; r < size; ++r) {
                    for (int c = 0; c < size; ++c) g_sub(r, c) = g(idx[r], idx[c]);
                }
                const Vector a_sub = min_norm_kkt(g_sub);
                if (a_sub.minCoeff() < -1e-10 ||
                    std::abs(a_sub.sum() - 1.0) > 1e-8) {
                    continue;
                }
                const double val = a_sub.dot(g_sub * a_sub);
                if (!std::isfinite(best) ||
                    val < best - 1e-12 * (1.0 + std::abs(best))) {
                    best = val;
                    alpha = Vector::Zero(m_count);
                    for (int r = 0; r < size; ++r) {
                        alpha(idx[r]) = std::max(0.0, a_sub(r));
                    }
                }
            } while (std::prev_permutation(mask.begin(), mask.end()));
        }
        if (alpha.size() == 0) {
            alpha = Vector::Constant(m_count, 1.0 / m_count);
        }
        alpha /= alpha.sum();
    } else {
        alpha = Vector::Constant(m_count, 1.0 / m_count);
        const double lip = std::max(1e-30, linalg::sym_evd(g).eigenvalues.maxCoeff());
        for (int it = 0; it < 20000; ++it) {
            const Vector next = project_simplex(alpha - (g * alpha) / lip);
            if ((next - alpha).norm() < 1e-14) {
                alpha = next;
                break;
            }
            alpha = next;
        }
    }
    Matrix combined = Matrix::Zero(k, k);
    for (int m = 0; m < m_count; ++m) combined += alpha(m) * h[m];
    return {linalg::symmetrized(combined), alpha};
}

CarrierSelection select_sphere_matrix(const std::vector<Matrix>& h,
                                      const Options& opts) {
    if (h.empty()) {
        throw InvalidInputError("select_sphere_matrix: empty constraint set");
    }
    CarrierSelection sel;
    switch (opts.carrier) {
        case CarrierPolicy::given_index: {
            if (opts.carrier_index < 0 ||
                opts.carrier_index >= static_cast<int>(h.size())) {
                throw InvalidInputError("select_sphere_matrix: carrier index out of range");
            }
            sel.carrier = linalg::symmetrized(h[opts.carrier_index]);
            sel.index = opts.carrier_index;
            break;
        }
        case CarrierPolicy::min_condition: {
            double best = std::numeric_limits<double>::infinity();
            for (size_t m = 0; m < h.size(); ++m) {
                const Matrix cand = linalg::symmetrized(h[m]);
                if (!numerically_pd(cand)) continue;
                const double kappa = linalg::condition_number(cand);
                if (kappa < best) {
                    best = kappa;
                    sel.carrier = cand;
                    sel.index = static_cast<int>(m);
                }
            }
            break;
        }
        case CarrierPolicy::frobenius_combination: {
            auto [combined, alpha] = generate_psd_combination(h);
            sel.carrier = combined;
            sel.alpha = alpha;
            sel.index = -1;
            break;
        }
    }
    if (sel.carrier.size() == 0 || !numerically_pd(sel.carrier)) {
        if (opts.jitter > 0.0 && sel.carrier.size() != 0) {
            return sel;  // cholesky(jitter) downstream handles the repair
        }
        throw NotPositiveDefiniteError(
            "select_sphere_matrix: no positive definite carrier; consider the jitter option");
    }
    return sel;
}

Reparam reparameterize(const Problem& p, const Matrix& carrier, double jitter) {
    const Eigen::Index k = p.q.rows();
    if (p.q.cols() != k || p.b.size() != k || carrier.rows() != k) {
        throw InvalidInputError("reparameterize: dimension mismatch");
    }
    Reparam rp;
    rp.f = linalg::cholesky(carrier, jitter);
    const auto tri = rp.f.triangularView<Eigen::Lower>();
    Matrix fi_q = tri.solve(linalg::symmetrized(p.q));
    rp.q_t = linalg::symmetrized(tri.solve(fi_q.transpose()).transpose());
    rp.b_t = tri.solve(p.b);
    Matrix cols(k * k, static_cast<Eigen::Index>(p.h.size()));
    for (size_t n = 0; n < p.h.size(); ++n) {
        const Matrix diff = carrier - linalg::symmetrized(p.h[n]);
        Matrix fi_d = tri.solve(diff);
        Matrix d = linalg::symmetrized(tri.solve(fi_d.transpose()).transpose());
        rp.d_t.push_back(d);
        cols.col(static_cast<Eigen::Index>(n)) = vec(d);
    }
    rp.d_basis = linalg::orthonormal_basis(cols, 1e-12);
    return rp;
}

Result solve_core(const Matrix& q, const Vector& b,
                  const std::vector<Matrix>& d, const Options& opts,
                  const Vector* x0) {
    const Eigen::Index k = q.rows();
    Matrix cols(k * k, static_cast<Eigen::Index>(d.size()));
    for (size_t n = 0; n < d.size(); ++n) {
        cols.col(static_cast<Eigen::Index>(n)) = vec(d[n]);
    }
    const Matrix basis = d.empty() ? Matrix(k * k, 0)
                                   : linalg::orthonormal_basis(cols, 1e-12);
    auto project_off = [&](const Vector& v) {
        if (basis.cols() == 0) return v;
        return Vector(v - basis * (basis.transpose() * v));
    };
    auto feasibility_of = [&](const Vector& x) {
        double worst = 0.0;
        for (const Matrix& dn : d) {
            worst = std::max(worst, std::abs(x.dot(dn * x)));
        }
        return worst;
    };

    double gamma = opts.gamma0 > 0.0 ? opts.gamma0 : 1.0;
    Vector x = x0 ? *x0 : scqp::solve(q, b).x;
    x /= x.norm();
    Vector z = Vector::Zero(k * k);
    Vector y = Vector::Zero(k * k);

    Result res;
    res.x = x;
    double best_score = std::numeric_limits<double>::infinity();
    // Stall detector state: best primal residual of the previous window
    // versus the current one.
    double ref_primal = std::numeric_limits<double>::infinity();
    double window_primal = std::numeric_limits<double>::infinity();
    int window_start = 0;

    for (int it = 0; it < opts.max_iters; ++it) {
        const Vector t_vec = z - y / gamma;
        const Matrix t_x = linalg::symmetrized(
            Eigen::Map<const Matrix>(t_vec.data(), k, k));
        if (opts.mode == Mode::exact) {
            const Matrix sub_q = q + gamma * Matrix::Identity(k, k) - 2.0 * gamma * t_x;
            x = scqp::solve(sub_q, b).x;
        } else {
            const Vector x_o = x;
            auto augmented = [&](const Vector& v) {
                const Vector vv = vec(Matrix(v * v.transpose()));
                return 0.5 * v.dot(q * v) + b.dot(v) +
                       0.5 * gamma * (vv - t_vec).squaredNorm();
            };
            const double before = augmented(x_o);
            // The linearized step only majorizes the surrogate when the
            // proximal weight dominates the dropped curvature; double mu
            // until the surrogate actually decreases.
            double mu = opts.mu;
            for (int bt = 0; bt < 60; ++bt) {
                const Matrix sub_q =
                    q + gamma * mu * Matrix::Identity(k, k);
                const Vector sub_b =
                    b + gamma * (2.0 - mu) * x_o - 2.0 * gamma * (t_x * x_o);
                x = scqp::solve(sub_q, sub_b).x;
                if (augmented(x) <= before + 1e-14 * (1.0 + std::abs(before))) {
                    break;
                }
                mu *= 2.0;
            }
        }
        const Vector xx = vec(Matrix(x * x.transpose()));
        const Vector z_prev = z;
        z = project_off(xx + y / gamma);
        y += gamma * (xx - z);

        const double primal = (xx - z).norm();
        const double dual = gamma * (z - z_prev).norm();
        const double feas = feasibility_of(x);
        const double objective = 0.5 * x.dot(q * x) + b.dot(x);
        if (opts.collect_trace) {
            res.trace.push_back({it, objective, feas, primal, gamma});
        }
        const double score = std::max(primal, feas);
        if (score < best_score) {
            best_score = score;
            res.x = x;
            res.objective = objective;
            res.feasibility = feas;
            res.primal_residual = primal;
        }
        res.iterations = it + 1;
        if (primal <= opts.tol && feas <= opts.tol) {
            res.converged = true;
            res.x = x;
            res.objective = objective;
            res.feasibility = feas;
            res.primal_residual = primal;
            break;
        }
        if (opts.gamma_policy == GammaPolicy::adaptive) {
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
    return res;
}

Result solve(const Problem& p, const Options& opts) {
    CarrierSelection sel = select_sphere_matrix(p.h, opts);
    Reparam rp = reparameterize(p, sel.carrier, opts.jitter);

    Options inner = opts;
    if (inner.gamma0 <= 0.0) {
        double kappa_min = std::numeric_limits<double>::infinity();
        for (const Matrix& hm : p.h) {
            const Matrix sym = linalg::symmetrized(hm);
            if (!numerically_pd(sym)) continue;
            kappa_min = std::min(kappa_min, linalg::condition_number(sym));
        }
        if (!std::isfinite(kappa_min)) kappa_min = 10.0;
        inner.gamma0 = 0.1 * kappa_min;
    }
    Result res = solve_core(rp.q_t, rp.b_t, rp.d_t, inner);
    // Back to the original coordinates: x = F^-T x_tilde.
    const Vector x = rp.f.transpose()
                         .triangularView<Eigen::Upper>()
                         .solve(res.x);
    res.x = x;
    res.objective = 0.5 * x.dot(linalg::symmetrized(p.q) * x) + p.b.dot(x);
    double feas = 0.0;
    for (const Matrix& hm : p.h) {
        feas = std::max(feas, std::abs(x.dot(linalg::symmetrized(hm) * x) - 1.0));
    }
    res.feasibility = feas;
    res.alpha = sel.alpha;
    return res;
}

Problem lift_inequalities(const Matrix& q, const Vector& b,
                          const std::vector<Matrix>& h_eq,
                          const std::vector<Matrix>& h_ineq) {
    const Eigen::Index k = q.rows();
    const Eigen::Index slack = static_cast<Eigen::Index>(h_ineq.size());
    const Eigen::Index ke = k + slack;
    Problem lifted;
    lifted.q = Matrix::Zero(ke, ke);
    lifted.q.topLeftCorner(k, k) = q;
    lifted.b = Vector::Zero(ke);
    lifted.b.head(k) = b;
    for (const Matrix& hm : h_eq) {
        Matrix he = Matrix::Zero(ke, ke);
        he.topLeftCorner(k, k) = hm;
        lifted.h.push_back(he);
    }
    for (Eigen::Index j = 0; j < slack; ++j) {
        Matrix he = Matrix::Zero(ke, ke);
        he.topLeftCorner(k, k) = h_ineq[static_cast<size_t>(j)];
        he(k + j, k + j) = 1.0;
        lifted.h.push_back(he);
    }
    return lifted;
}

}  // namespace sphereqp::qcqp
