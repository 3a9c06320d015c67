#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sphereqp/scqp.hpp"

namespace sphereqp::scqp_block {

struct Options {
    int max_block = 64;
    int max_outer = 20;        // repartition rounds
    int max_sweeps = 200;      // inner sweeps per partition
    double sweep_tol = 1e-10;  // relative objective decrease per sweep
    std::uint64_t seed = 0;
    scqp::Options scqp;
};

/// Block-coordinate state for one partition: per-segment unit directions
/// and a unit-norm scale vector, so the assembled x always has unit norm.
class BlockSolver {
  public:
    BlockSolver(const Matrix& q, const Vector& b, Options opts);

    /// Shuffle indices and cut contiguous chunks of size <= max_block,
    /// carrying the current assembled x into the new segments.
    void repartition(std::mt19937_64& rng);

    /// Closed-form re-solve of segment l's direction, scales fixed.
    /// Skipped when |alpha_l| is negligible.
    void update_direction(int l);

    /// Two-parameter sphere problem over (alpha_l, combined rest), then
    /// proportional rebalance of the remaining scales.
    void update_scales(int l);

    Vector assemble() const;
    double objective() const;
    int segment_count() const { return static_cast<int>(segments_.size()); }
    const std::vector<std::vector<int>>& segments() const { return segments_; }

  private:
    // Unit direction of the complement of segment l under the current
    // scales, with a uniform fallback when every other scale is zero.
    Vector complement_direction(int l, double& alpha_rest) const;

    const Matrix& q_;
    const Vector& b_;
    Options opts_;
    std::vector<std::vector<int>> segments_;
    std::vector<Vector> directions_;          // unit per segment
    std::vector<linalg::Spectrum> spectra_;   // EVD of each Q_{l,l}
    Vector alpha_;                            // unit norm
    Vector x_;                                // assembled, kept in sync
};

/// Algorithm: random partition, per-block closed-form sphere solves and
/// scale rebalancing, repartitioning until no further improvement.
scqp::Solution solve_blocked(const Matrix& q, const Vector& b,
                             const Options& opts = {});

}  // namespace sphereqp::scqp_block
