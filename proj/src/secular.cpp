#include "sphereqp/secular.hpp"

#include <algorithm>
#include <cmath>

namespace sphereqp::secular {

namespace {

// Safeguarded root finder for a strictly decreasing function with
// f(lo) >= 0 >= f(hi): bisection until the interval shrinks to
// `bisect_width`, then Newton steps clamped to the surviving interval.
template <typename F, typename DF>
double bisect_newton(F f, DF df, double lo, double hi, double ftol,
                     int max_iters = 200, double bisect_width = 1e-6) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo < 0.0) return lo;
    if (fhi > 0.0) return hi;
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iters; ++it) {
        if (hi - lo > bisect_width) {
            x = 0.5 * (lo + hi);
            const double fx = f(x);
            if (std::abs(fx) <= ftol) return x;
            if (fx > 0.0) lo = x; else hi = x;
            continue;
        }
        const double fx = f(x);
        if (std::abs(fx) <= ftol) return x;
        if (fx > 0.0) lo = x; else hi = x;
        const double dfx = df(x);
        double next = (dfx != 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == x) return x;
        x = next;
    }
    if (std::abs(f(x)) <= ftol * 1e3 || hi - lo < 1e-14) return x;
    throw ConvergenceError("secular root finder: tolerance not reached", x);
}

// p_d(t) = t^4 + 2d t^3 + (d^2 - 1) t^2 - 2 c1^2 d t - c1^2 d^2 has a
// unique root in [|c1|, 1]; p_d(|c1|) <= 0 <= p_d(1).
double quartic_root(double c1_abs, double d) {
    const double c1sq = c1_abs * c1_abs;
    auto p = [&](double t) {
        return ((t + 2.0 * d) * t + (d * d - 1.0)) * t * t
               - 2.0 * c1sq * d * t - c1sq * d * d;
    };
    auto dp = [&](double t) {
        return ((4.0 * t + 6.0 * d) * t + 2.0 * (d * d - 1.0)) * t
               - 2.0 * c1sq * d;
    };
    // p is increasing through its unique sign change, bisect_newton wants a
    // decreasing function, so negate.
    auto nf = [&](double t) { return -p(t); };
    auto ndf = [&](double t) { return -dp(t); };
    return bisect_newton(nf, ndf, c1_abs, 1.0, 1e-14, 200, 1e-8);
}

// Root of 1 - sum_{l<=L} c_l^2/(s_l - x)^2 - tail^2/(s_tail - x)^2 in
// [0, 1 - |c1|]; the function is strictly decreasing there.
double truncated_root(const Vector& s, const Vector& c, int L,
                      double tail_sq, double s_tail, double hi) {
    auto f = [&](double x) {
        double v = 1.0;
        for (int l = 0; l < L; ++l) {
            const double den = s(l) - x;
            v -= c(l) * c(l) / (den * den);
        }
        const double den = s_tail - x;
        v -= tail_sq / (den * den);
        return v;
    };
    auto df = [&](double x) {
        double v = 0.0;
        for (int l = 0; l < L; ++l) {
            const double den = s(l) - x;
            v -= 2.0 * c(l) * c(l) / (den * den * den);
        }
        const double den = s_tail - x;
        v -= 2.0 * tail_sq / (den * den * den);
        return v;
    };
    return bisect_newton(f, df, 0.0, hi, 1e-14, 200, 1e-8);
}

}  // namespace

void CanonicalSpectrum::validate() const {
    const Eigen::Index k = s.size();
    if (k == 0 || c.size() != k) {
        throw InvalidInputError("CanonicalSpectrum: s and c must be nonempty and equal length");
    }
    if (!s.allFinite() || !c.allFinite()) {
        throw InvalidInputError("CanonicalSpectrum: non-finite entries");
    }
    if (std::abs(s(0) - 1.0) > 1e-12) {
        throw InvalidInputError("CanonicalSpectrum: s[0] must equal 1");
    }
    for (Eigen::Index i = 1; i < k; ++i) {
        if (!(s(i) > s(i - 1))) {
            throw InvalidInputError("CanonicalSpectrum: s must be strictly ascending");
        }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        if (c(i) == 0.0) {
            throw InvalidInputError("CanonicalSpectrum: c entries must be nonzero");
        }
    }
    if (std::abs(c.norm() - 1.0) > 1e-12) {
        throw InvalidInputError("CanonicalSpectrum: c must have unit norm");
    }
}

double eval_secular(double lambda, const CanonicalSpectrum& spec) {
    double v = 1.0;
    for (Eigen::Index k = 0; k < spec.s.size(); ++k) {
        const double den = lambda - spec.s(k);
        if (std::abs(den) < 1e-300) {
            throw InvalidInputError("eval_secular: lambda coincides with a pole");
        }
        v -= spec.c(k) * spec.c(k) / (den * den);
    }
    return v;
}

SecularBracket bracket_one_term(const CanonicalSpectrum& spec) {
    spec.validate();
    const Eigen::Index k = spec.s.size();
    if (k < 2) {
        throw InvalidInputError("bracket_one_term: needs at least two terms");
    }
    const double c1 = std::abs(spec.c(0));
    const double d1 = spec.s(1) - spec.s(0);
    const double d2 = spec.s(k - 1) - spec.s(0);
    const double t1 = quartic_root(c1, d1);
    const double t2 = quartic_root(c1, d2);
    SecularBracket br;
    br.lower = std::max(0.0, 1.0 - t1);
    br.upper = std::min(1.0 - c1, 1.0 - t2);
    if (br.upper < br.lower) std::swap(br.lower, br.upper);
    br.terms_used = 1;
    return br;
}

SecularBracket bracket_truncated(const CanonicalSpectrum& spec, int L) {
    spec.validate();
    const int k = static_cast<int>(spec.s.size());
    if (L < 1 || L > k - 2) {
        throw InvalidInputError("bracket_truncated: L must lie in [1, K-2]");
    }
    const double hi = 1.0 - std::abs(spec.c(0));
    double tail_sq = 0.0;
    for (int i = L; i < k; ++i) tail_sq += spec.c(i) * spec.c(i);
    SecularBracket br;
    br.lower = truncated_root(spec.s, spec.c, L, tail_sq, spec.s(L), hi);
    br.upper = truncated_root(spec.s, spec.c, L, tail_sq, spec.s(k - 1), hi);
    if (br.upper < br.lower) std::swap(br.lower, br.upper);
    br.terms_used = L;
    return br;
}

RootResult solve_min_root(const CanonicalSpectrum& spec, double tol) {
    spec.validate();
    const int k = static_cast<int>(spec.s.size());
    RootResult res;
    if (k == 1) {
        res.root = 1.0 - std::abs(spec.c(0));
        res.bracket = {res.root, res.root, 1};
        return res;
    }
    SecularBracket br = bracket_one_term(spec);
    // Truncation pays off when the leading eigenvalues cluster near 1 while
    // a later one clears 1 + s_1: pick the smallest such L.
    if (k >= 3 && spec.s(1) - spec.s(0) < 1.0) {
        int L = k - 2;
        for (int cand = 1; cand <= k - 2; ++cand) {
            if (spec.s(cand) - 1.0 >= 1.0) { L = cand; break; }
        }
        const SecularBracket tr = bracket_truncated(spec, L);
        if (tr.lower > br.lower) { br.lower = tr.lower; br.terms_used = tr.terms_used; }
        if (tr.upper < br.upper) { br.upper = tr.upper; br.terms_used = tr.terms_used; }
    }
    const double margin = 1e-14;
    double lo = br.lower;
    double hi = std::min(br.upper, spec.s(0) - margin);
    if (hi < lo) hi = lo;
    auto f = [&](double x) { return eval_secular(x, spec); };
    auto df = [&](double x) {
        double v = 0.0;
        for (int i = 0; i < k; ++i) {
            const double den = x - spec.s(i);
            v += 2.0 * spec.c(i) * spec.c(i) / (den * den * den);
        }
        return v;
    };
    res.root = bisect_newton(f, df, lo, hi, tol * k, 200);
    res.bracket = br;
    return res;
}

}  // namespace sphereqp::secular
