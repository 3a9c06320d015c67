#pragma once

#include <cstdint>
#include <vector>

#include "sphereqp/linalg.hpp"

namespace sphereqp::deconv_demo {

struct Options {
    int size = 32;           // image side, 16..64
    std::uint64_t seed = 0;
    int max_iters = 2000;
    double tol = 1e-10;      // relative objective change
};

struct Report {
    int size = 0;
    double psnr_blurred = 0.0;
    double psnr_reconstructed = 0.0;
    double alpha = 0.0;
    /// |alpha - b^T x / x^T Q x| at the last iterate; zero at a fixed point.
    double alpha_stationarity = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // |y - alpha D x|^2 per iteration
};

/// Vertical motion blur: 11-tap column kernel (5 pixels above and below),
/// truncated and renormalized at the top and bottom image rows.
Matrix blur_matrix(int size);

/// Smooth synthetic grayscale image in [0, 1], vectorized column-major.
Vector synthetic_image(int size, std::uint64_t seed);

/// Deblurring by alternating the closed-form scale alpha with a unit-norm
/// image direction solved as a sphere-constrained QP.
Report run(const Options& opts = {});

}  // namespace sphereqp::deconv_demo
