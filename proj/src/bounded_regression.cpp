#include "sphereqp/bounded_regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sphereqp/scqp.hpp"

namespace sphereqp::bounded_regression {

namespace {

struct Compressed {
    Matrix u;  // I x rho
    Vector s;  // rho
    Matrix v;  // K x rho
};

Compressed compress(const Matrix& a, double rank_tol = 1e-12) {
    linalg::ThinSvd svd = linalg::thin_svd(a);
    const double smax = svd.singular_values.size() > 0 ? svd.singular_values(0) : 0.0;
    Eigen::Index rho = 0;
    while (rho < svd.singular_values.size() &&
           svd.singular_values(rho) > rank_tol * smax) {
        ++rho;
    }
    return Compressed{svd.u.leftCols(rho), svd.singular_values.head(rho),
                      svd.v.leftCols(rho)};
}

// Min-norm x with |z - A x| == delta exactly. Requires delta >= the
// residual floor of (A, z); the minimum-norm solution lives in A's row
// space, so the compressed coordinates suffice.
Vector equality_core(const Matrix& a, const Vector& z, double delta) {
    const Compressed cmp = compress(a);
    const Eigen::Index rho = cmp.s.size();
    if (rho == 0) {
        return Vector::Zero(a.cols());
    }
    const Vector zhat = cmp.u.transpose() * z;
    const double floor_sq = std::max(0.0, z.squaredNorm() - zhat.squaredNorm());
    const double dhat_sq = delta * delta - floor_sq;
    const Vector inv_s = cmp.s.cwiseInverse();
    if (dhat_sq <= 1e-14 * (z.squaredNorm() + delta * delta)) {
        // Residual already at its floor: least-squares point.
        return cmp.v * (inv_s.asDiagonal() * zhat);
    }
    const double dhat = std::sqrt(dhat_sq);
    // |x|^2 = sum ((zhat_i - dhat w_i)/s_i)^2 over |w| = 1.
    const Vector inv_s2 = inv_s.cwiseProduct(inv_s);
    Matrix q = (2.0 * dhat * inv_s2).asDiagonal();
    Vector b = -2.0 * inv_s2.cwiseProduct(zhat);
    const Vector w = scqp::solve(q, b).x;
    return cmp.v * (inv_s.asDiagonal() * (zhat - dhat * w));
}

}  // namespace

BoundInfo validate_bound(const Problem& p) {
    if (p.a.rows() != p.y.size() || !std::isfinite(p.delta) || p.delta < 0.0) {
        throw InvalidInputError("bounded_regression: bad dimensions or delta");
    }
    const Compressed cmp = compress(p.a);
    const Vector yhat = cmp.u.transpose() * p.y;
    BoundInfo info;
    info.residual_floor =
        std::sqrt(std::max(0.0, p.y.squaredNorm() - yhat.squaredNorm()));
    if (p.delta >= p.y.norm()) {
        info.cls = BoundClass::zero_solution;
    } else if (p.delta < info.residual_floor - 1e-12 * (1.0 + p.y.norm())) {
        info.cls = BoundClass::infeasible;
    } else {
        info.cls = BoundClass::feasible;
    }
    return info;
}

Vector solve_tall(const Problem& p) {
    return equality_core(p.a, p.y, p.delta);
}

Vector feasible_start(const Problem& p) {
    const Compressed cmp = compress(p.a);
    const Vector yhat = cmp.u.transpose() * p.y;
    const Vector x_ls = cmp.v * (cmp.s.cwiseInverse().asDiagonal() * yhat);
    const double proj_sq = yhat.squaredNorm();  // |A x_ls|^2
    const double floor_sq = std::max(0.0, p.y.squaredNorm() - proj_sq);
    if (proj_sq == 0.0) {
        return Vector::Zero(p.a.cols());
    }
    const double inside = std::max(0.0, p.delta * p.delta - floor_sq) / proj_sq;
    const double tau = 1.0 - std::sqrt(std::min(1.0, inside));
    return tau * x_ls;
}

Vector solve_wide(const Problem& p, const Vector& x0, const Options& opts) {
    const Eigen::Index rows = p.a.rows();
    const Eigen::Index cols = p.a.cols();
    if (x0.size() != cols) {
        throw InvalidInputError("solve_wide: start has wrong length");
    }
    const int card = std::max<int>(
        2, std::min<Eigen::Index>({static_cast<Eigen::Index>(opts.subset_size),
                                   rows, cols}));
    std::mt19937_64 rng(opts.seed);
    std::vector<int> pool(cols);
    std::iota(pool.begin(), pool.end(), 0);

    Vector x = x0;
    Vector residual = p.y - p.a * x;
    const int subsets_per_pass =
        static_cast<int>((cols + card - 1) / card);
    for (int pass = 0; pass < opts.max_passes; ++pass) {
        const double norm_before = x.norm();
        for (int sub = 0; sub < subsets_per_pass; ++sub) {
            Matrix a_sub(rows, card);
            std::vector<int> chosen;
            bool ok = false;
            for (int attempt = 0; attempt < opts.max_subset_tries; ++attempt) {
                std::shuffle(pool.begin(), pool.end(), rng);
                chosen.assign(pool.begin(), pool.begin() + card);
                for (int i = 0; i < card; ++i) a_sub.col(i) = p.a.col(chosen[i]);
                const linalg::ThinSvd svd = linalg::thin_svd(a_sub);
                const double smin = svd.singular_values(svd.singular_values.size() - 1);
                if (smin > 0.0 && svd.singular_values(0) / smin < 1e12) {
                    ok = true;
                    break;
                }
            }
            if (!ok) {
                throw ConvergenceError(
                    "solve_wide: no well-conditioned column subset found",
                    x.norm());
            }
            Vector x_sub(card);
            for (int i = 0; i < card; ++i) x_sub(i) = x(chosen[i]);
            const Vector z = residual + a_sub * x_sub;
            const Vector x_new = equality_core(a_sub, z, p.delta);
            if (x_new.norm() <= x_sub.norm()) {
                for (int i = 0; i < card; ++i) x(chosen[i]) = x_new(i);
                residual = z - a_sub * x_new;
            }
        }
        const double norm_after = x.norm();
        if (norm_before - norm_after < opts.tol * (1.0 + norm_before)) break;
    }
    return x;
}

Vector solve(const Problem& p, const Options& opts) {
    const BoundInfo info = validate_bound(p);
    if (info.cls == BoundClass::zero_solution) {
        return Vector::Zero(p.a.cols());
    }
    if (info.cls == BoundClass::infeasible) {
        throw InvalidInputError(
            "bounded_regression: delta below the attainable residual floor");
    }
    if (p.a.cols() <= p.a.rows()) {
        return solve_tall(p);
    }
    return solve_wide(p, feasible_start(p), opts);
}

}  // namespace sphereqp::bounded_regression
