// Independent reference computations used by the unit and acceptance tests.
// Everything here avoids the library's own solution formulas: brute-force
// grids, projected gradient polish, and regularization-path bisection.
#pragma once

#include <cmath>
#include <random>

#include "sphereqp/linalg.hpp"

namespace oracles {

using sphereqp::Matrix;
using sphereqp::Vector;

inline double objective(const Matrix& q, const Vector& b, const Vector& x) {
    return 0.5 * x.dot(q * x) + b.dot(x);
}

// Projected gradient descent on the sphere with backtracking, used to
// polish a coarse grid winner to high accuracy.
inline Vector polish_on_sphere(const Matrix& q, const Vector& b, Vector x,
                               int iters = 2000) {
    double step = 1.0 / (1.0 + q.norm());
    double best = objective(q, b, x);
    for (int it = 0; it < iters; ++it) {
        const Vector grad = q * x + b;
        Vector cand = x - step * grad;
        cand /= cand.norm();
        const double val = objective(q, b, cand);
        if (val < best - 1e-18) {
            best = val;
            x = cand;
            step *= 1.2;
        } else {
            step *= 0.5;
            if (step < 1e-18) break;
        }
    }
    return x;
}

// Dense angle sweep for K = 2.
inline Vector grid_oracle_k2(const Matrix& q, const Vector& b,
                             int grid = 1000000) {
    double best = std::numeric_limits<double>::infinity();
    Vector best_x(2);
    for (int i = 0; i < grid; ++i) {
        const double theta = 2.0 * M_PI * i / grid;
        Vector x(2);
        x << std::cos(theta), std::sin(theta);
        const double val = objective(q, b, x);
        if (val < best) {
            best = val;
            best_x = x;
        }
    }
    return polish_on_sphere(q, b, best_x);
}

// Fibonacci-sphere sweep for K = 3.
inline Vector grid_oracle_k3(const Matrix& q, const Vector& b,
                             int points = 200000) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    double best = std::numeric_limits<double>::infinity();
    Vector best_x(3);
    for (int i = 0; i < points; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / points;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        Vector x(3);
        x << r * std::cos(phi), r * std::sin(phi), z;
        const double val = objective(q, b, x);
        if (val < best) {
            best = val;
            best_x = x;
        }
    }
    return polish_on_sphere(q, b, best_x);
}

// Regularization-path oracle for min |x| s.t. |y - Ax| <= delta: the path
// x(nu) = (A^T A + nu I)^-1 A^T y has residual increasing in nu; bisect nu
// until the residual hits delta. Globally optimal by convexity.
inline Vector tikhonov_path_oracle(const Matrix& a, const Vector& y,
                                   double delta) {
    const Matrix gram = a.transpose() * a;
    const Matrix eye = Matrix::Identity(a.cols(), a.cols());
    auto x_of = [&](double nu) {
        return Vector((gram + nu * eye).ldlt().solve(a.transpose() * y));
    };
    auto res_of = [&](double nu) { return (y - a * x_of(nu)).norm(); };
    double lo = 0.0;
    double hi = 1.0;
    while (res_of(hi) < delta && hi < 1e18) hi *= 10.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (res_of(mid) < delta) lo = mid; else hi = mid;
    }
    return x_of(0.5 * (lo + hi));
}

inline Matrix random_symmetric(std::mt19937_64& rng, int k, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Matrix m(k, k);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) m(r, c) = gauss(rng);
    }
    return sphereqp::linalg::symmetrized(m);
}

inline Matrix random_spd(std::mt19937_64& rng, int k, double ridge = 0.5) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(k, k);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < k; ++c) m(r, c) = gauss(rng);
    }
    return Matrix(m.transpose() * m + ridge * Matrix::Identity(k, k));
}

inline Vector random_vector(std::mt19937_64& rng, int k, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Vector v(k);
    for (int i = 0; i < k; ++i) v(i) = gauss(rng);
    return v;
}

inline double kkt_residual(const Matrix& q, const Vector& b, const Vector& x,
                           double multiplier) {
    return ((q - multiplier * Matrix::Identity(q.rows(), q.cols())) * x + b)
        .norm();
}

}  // namespace oracles
