#include "sphereqp/scqp_block.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sphereqp::scqp_block {

namespace {
constexpr double kAlphaFloor = 1e-14;
}

BlockSolver::BlockSolver(const Matrix& q, const Vector& b, Options opts)
    : q_(q), b_(b), opts_(std::move(opts)) {
    if (q_.rows() != q_.cols() || q_.rows() != b_.size()) {
        throw InvalidInputError("solve_blocked: dimension mismatch");
    }
    const Eigen::Index k = q_.rows();
    x_ = b_.norm() > 0.0 ? Vector(-b_ / b_.norm()) : Vector::Unit(k, 0);
}

void BlockSolver::repartition(std::mt19937_64& rng) {
    const int k = static_cast<int>(q_.rows());
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    segments_.clear();
    for (int start = 0; start < k; start += opts_.max_block) {
        const int stop = std::min(k, start + opts_.max_block);
        segments_.emplace_back(perm.begin() + start, perm.begin() + stop);
    }
    const int l_count = segment_count();
    directions_.assign(l_count, Vector());
    spectra_.assign(l_count, linalg::Spectrum());
    alpha_ = Vector(l_count);
    for (int l = 0; l < l_count; ++l) {
        const auto& seg = segments_[l];
        const int n = static_cast<int>(seg.size());
        Vector xl(n);
        Matrix qll(n, n);
        for (int i = 0; i < n; ++i) {
            xl(i) = x_(seg[i]);
            for (int j = 0; j < n; ++j) qll(i, j) = q_(seg[i], seg[j]);
        }
        spectra_[l] = linalg::sym_evd(qll);
        alpha_(l) = xl.norm();
        directions_[l] = alpha_(l) > 0.0 ? Vector(xl / alpha_(l)) : Vector::Unit(n, 0);
    }
    if (alpha_.norm() > 0.0) alpha_ /= alpha_.norm();
}

Vector BlockSolver::assemble() const { return x_; }

double BlockSolver::objective() const {
    return 0.5 * x_.dot(q_ * x_) + b_.dot(x_);
}

void BlockSolver::update_direction(int l) {
    if (std::abs(alpha_(l)) < kAlphaFloor) return;
    const auto& seg = segments_[l];
    const int n = static_cast<int>(seg.size());
    // Linear term couples the block to the fixed remainder of x.
    Vector v(n);
    for (int i = 0; i < n; ++i) {
        double coupling = b_(seg[i]);
        coupling += q_.row(seg[i]).dot(x_);
        coupling -= [&] {
            double own = 0.0;
            for (int j = 0; j < n; ++j) own += q_(seg[i], seg[j]) * x_(seg[j]);
            return own;
        }();
        v(i) = alpha_(l) * coupling;
    }
    const double before = objective();
    const double a2 = alpha_(l) * alpha_(l);
    linalg::Spectrum scaled{Vector(a2 * spectra_[l].eigenvalues),
                            spectra_[l].eigenvectors};
    Vector candidate;
    if (v.norm() == 0.0) {
        candidate = scaled.eigenvectors.col(0);
    } else {
        candidate = scqp::solve_with_evd(scaled, v, opts_.scqp).x;
    }
    Vector old = directions_[l];
    directions_[l] = candidate;
    for (int i = 0; i < n; ++i) x_(seg[i]) = alpha_(l) * candidate(i);
    if (objective() > before + 1e-13 * (1.0 + std::abs(before))) {
        directions_[l] = old;
        for (int i = 0; i < n; ++i) x_(seg[i]) = alpha_(l) * old(i);
    }
}

Vector BlockSolver::complement_direction(int l, double& alpha_rest) const {
    const Eigen::Index k = q_.rows();
    Vector rest = x_;
    for (int idx : segments_[l]) rest(idx) = 0.0;
    alpha_rest = rest.norm();
    if (alpha_rest > kAlphaFloor) return rest / alpha_rest;
    // Every other block has zero scale: give them equal weight so the
    // rebalance below stays consistent with this direction.
    rest = Vector::Zero(k);
    const int others = segment_count() - 1;
    if (others == 0) {
        alpha_rest = 0.0;
        return rest;
    }
    const double w = 1.0 / std::sqrt(static_cast<double>(others));
    for (int m = 0; m < segment_count(); ++m) {
        if (m == l) continue;
        const auto& seg = segments_[m];
        for (size_t i = 0; i < seg.size(); ++i) {
            rest(seg[i]) = w * directions_[m](i);
        }
    }
    alpha_rest = 0.0;
    return rest;
}

void BlockSolver::update_scales(int l) {
    if (segment_count() == 1) {
        alpha_(0) = 1.0;
        return;
    }
    const auto& seg = segments_[l];
    const int n = static_cast<int>(seg.size());
    Vector dir_l = Vector::Zero(q_.rows());
    for (int i = 0; i < n; ++i) dir_l(seg[i]) = directions_[l](i);
    double alpha_rest = 0.0;
    Vector dir_rest = complement_direction(l, alpha_rest);

    const double before = objective();
    Matrix t(2, 2);
    t(0, 0) = dir_l.dot(q_ * dir_l);
    t(1, 1) = dir_rest.dot(q_ * dir_rest);
    t(0, 1) = t(1, 0) = dir_l.dot(q_ * dir_rest);
    Vector u(2);
    u(0) = b_.dot(dir_l);
    u(1) = b_.dot(dir_rest);
    Vector pair;
    if (u.norm() == 0.0) {
        pair = linalg::sym_evd(t).eigenvectors.col(0);
    } else {
        pair = scqp::solve(t, u, opts_.scqp).x;
    }

    Vector old_alpha = alpha_;
    Vector old_x = x_;
    const double a_new = pair(0);
    const double beta = pair(1);
    if (alpha_rest > kAlphaFloor) {
        for (int m = 0; m < segment_count(); ++m) {
            if (m != l) alpha_(m) *= beta / alpha_rest;
        }
    } else {
        const double w = beta / std::sqrt(static_cast<double>(segment_count() - 1));
        for (int m = 0; m < segment_count(); ++m) {
            if (m != l) alpha_(m) = w;
        }
    }
    alpha_(l) = a_new;
    x_ = a_new * dir_l + beta * dir_rest;
    if (objective() > before + 1e-13 * (1.0 + std::abs(before))) {
        alpha_ = old_alpha;
        x_ = old_x;
    }
}

scqp::Solution solve_blocked(const Matrix& q, const Vector& b,
                             const Options& opts) {
    if (q.rows() != q.cols() || q.rows() != b.size()) {
        throw InvalidInputError("solve_blocked: dimension mismatch");
    }
    if (q.rows() <= opts.max_block) {
        return scqp::solve(q, b, opts.scqp);
    }
    BlockSolver solver(q, b, opts);
    std::mt19937_64 rng(opts.seed);
    double outer_best = std::numeric_limits<double>::infinity();
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        solver.repartition(rng);
        double prev = solver.objective();
        for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
            for (int l = 0; l < solver.segment_count(); ++l) {
                solver.update_direction(l);
                solver.update_scales(l);
            }
            const double cur = solver.objective();
            if (prev - cur < opts.sweep_tol * (1.0 + std::abs(prev))) {
                prev = cur;
                break;
            }
            prev = cur;
        }
        if (outer_best - prev < opts.sweep_tol * (1.0 + std::abs(outer_best))) {
            outer_best = std::min(outer_best, prev);
            break;
        }
        outer_best = prev;
    }
    scqp::Solution sol;
    sol.x = solver.assemble();
    sol.x /= sol.x.norm();
    sol.objective = 0.5 * sol.x.dot(q * sol.x) + b.dot(sol.x);
    sol.multiplier = sol.x.dot(q * sol.x) + b.dot(sol.x);
    sol.multiplicity = scqp::Multiplicity::unique;
    return sol;
}

}  // namespace sphereqp::scqp_block
