#pragma once

#include "sphereqp/linalg.hpp"

namespace sphereqp::secular {

/// Shifted, scaled spectrum of a sphere-constrained QP: s strictly ascending
/// with s[0] == 1, c with unit norm and all entries nonzero.
struct CanonicalSpectrum {
    Vector s;
    Vector c;

    /// Throws InvalidInputError when the invariants fail.
    void validate() const;
};

/// Bounds on the minimum root of the secular derivative, plus how many
/// leading terms were kept exact when forming them.
struct SecularBracket {
    double lower = 0.0;
    double upper = 0.0;
    int terms_used = 1;
};

/// f'(lambda) = 1 - sum_k c_k^2 / (lambda - s_k)^2.
/// Throws InvalidInputError when lambda collides with a pole.
double eval_secular(double lambda, const CanonicalSpectrum& spec);

/// Bracket from the two degree-4 polynomials built with d1 = s2 - s1 and
/// d2 = sK - s1; each has a unique root t in [|c1|, 1] and the minimum
/// secular root lies in (1 - t1, 1 - t2). Requires K >= 2 and distinct s.
SecularBracket bracket_one_term(const CanonicalSpectrum& spec);

/// Bracket from the truncated secular functions keeping L exact leading
/// terms and lumping the tail at s_{L+1} (lower) or s_K (upper).
/// Requires 1 <= L <= K - 2. Brackets nest as L grows.
SecularBracket bracket_truncated(const CanonicalSpectrum& spec, int L);

struct RootResult {
    double root = 0.0;
    SecularBracket bracket;
};

/// Minimum root of the secular derivative: bisection inside the bracket to
/// width 1e-6 followed by Newton polish, stopping at |f'| <= tol * K.
/// K == 1 is analytic: lambda = 1 - |c1|.
RootResult solve_min_root(const CanonicalSpectrum& spec, double tol = 1e-12);

}  // namespace sphereqp::secular
