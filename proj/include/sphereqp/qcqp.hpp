#pragma once

#include <utility>
#include <vector>

#include "sphereqp/linalg.hpp"

namespace sphereqp::qcqp {

/// min 1/2 x^T Q x + b^T x subject to x^T H_m x = 1 for every m.
struct Problem {
    Matrix q;
    Vector b;
    std::vector<Matrix> h;
};

enum class CarrierPolicy { given_index, min_condition, frobenius_combination };
enum class GammaPolicy { fixed, adaptive };
enum class Mode { exact, linearized };

struct Options {
    CarrierPolicy carrier = CarrierPolicy::min_condition;
    int carrier_index = 0;       // for given_index
    GammaPolicy gamma_policy = GammaPolicy::adaptive;
    double gamma0 = -1.0;        // <= 0 picks 0.1 * smallest carrier condition number
    double alpha_step = 2.0;     // gamma multiplier on stall
    Mode mode = Mode::exact;
    double mu = 1.0;             // linearized-mode proximal weight
    double jitter = 0.0;         // Cholesky repair for semidefinite carriers
    int max_iters = 100000;
    double tol = 1e-8;           // primal residual and constraint residual target
    int stall_window = 50;
    double stall_improvement = 0.01;
    bool collect_trace = false;
};

struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;
    double feasibility = 0.0;
    double primal_residual = 0.0;
    double gamma = 0.0;
};

struct Result {
    Vector x;
    double objective = 0.0;
    double feasibility = 0.0;      // max_m |x^T H_m x - 1|
    double primal_residual = 0.0;  // |x (x) x - z| at the kept iterate
    bool converged = false;
    int iterations = 0;
    Vector alpha;                  // combination weights when used
    std::vector<TraceRecord> trace;
};

/// Simplex-constrained QP min a^T G a with G = (vec H)^T (vec H): the
/// convex combination of the constraint matrices with smallest Frobenius
/// norm. Exact support enumeration up to M = 12, projected gradient beyond.
std::pair<Matrix, Vector> generate_psd_combination(const std::vector<Matrix>& h);

struct CarrierSelection {
    Matrix carrier;
    Vector alpha;  // empty unless frobenius_combination
    int index = -1;
};

CarrierSelection select_sphere_matrix(const std::vector<Matrix>& h,
                                      const Options& opts);

/// Cholesky change of variables turning the carrier ellipsoid into the unit
/// sphere; the remaining constraints become homogeneous x^T D_n x = 0.
struct Reparam {
    Matrix f;                // lower Cholesky factor of the carrier
    Matrix q_t;              // F^-1 Q F^-T
    Vector b_t;              // F^-1 b
    std::vector<Matrix> d_t; // F^-1 (carrier - H_n) F^-T, one per constraint
    Matrix d_basis;          // orthonormal basis of span{vec(D_n)}
};

Reparam reparameterize(const Problem& p, const Matrix& carrier,
                       double jitter = 0.0);

/// Splitting solver for min 1/2 x^T Q x + b^T x over the unit sphere with
/// homogeneous orthogonality constraints x^T D_n x = 0. Also the inner
/// engine for the structured-eigenvector module. Feasibility reported is
/// max_n |x^T D_n x|.
Result solve_core(const Matrix& q, const Vector& b,
                  const std::vector<Matrix>& d, const Options& opts,
                  const Vector* x0 = nullptr);

Result solve(const Problem& p, const Options& opts = {});

/// Slack lift of x^T H x <= 1 constraints into equalities on an expanded
/// variable; Q, b and the equality constraints are zero-padded to match.
Problem lift_inequalities(const Matrix& q, const Vector& b,
                          const std::vector<Matrix>& h_eq,
                          const std::vector<Matrix>& h_ineq);

}  // namespace sphereqp::qcqp
