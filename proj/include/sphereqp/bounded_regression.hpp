#pragma once

#include <cstdint>

#include "sphereqp/linalg.hpp"

namespace sphereqp::bounded_regression {

/// min |x|^2 subject to |y - A x| = delta (the <= form is equivalent for
/// delta < |y|, where the constraint is always active).
struct Problem {
    Matrix a;
    Vector y;
    double delta = 0.0;
};

enum class BoundClass { zero_solution, feasible, infeasible };

struct BoundInfo {
    BoundClass cls = BoundClass::feasible;
    double residual_floor = 0.0;  // |projection of y off A's column space|
};

/// delta below the residual floor is infeasible; delta >= |y| makes x = 0
/// optimal for the <= form.
BoundInfo validate_bound(const Problem& p);

struct Options {
    double tol = 1e-10;        // relative norm decrease per pass
    int max_passes = 500;
    int subset_size = 8;       // capped at min(I, K)
    int max_subset_tries = 50; // condition-limited rejection sampling
    std::uint64_t seed = 0;
};

/// Closed form via SVD reparameterization onto a sphere problem.
/// Handles rank-deficient A by compressing onto its row space first.
Vector solve_tall(const Problem& p);

/// Feasible point on the segment from 0 to the min-norm least-squares
/// solution, scaled so the residual equals delta exactly.
Vector feasible_start(const Problem& p);

/// Iterative coordinate-subset descent for K > I: each step re-solves a
/// small equality-constrained core exactly, so the residual stays at delta
/// and |x| never increases.
Vector solve_wide(const Problem& p, const Vector& x0, const Options& opts = {});

/// Dispatcher: zero/infeasible classification, then tall or wide path.
Vector solve(const Problem& p, const Options& opts = {});

}  // namespace sphereqp::bounded_regression
