#include "sphereqp/scqp.hpp"

#include <algorithm>
#include <cmath>

namespace sphereqp::scqp {

namespace {

double zero_threshold(const Vector& c, double zero_tol) {
    return zero_tol * std::max(1.0, c.cwiseAbs().maxCoeff());
}

// Solution of the collapsed canonical problem: s strictly ascending with
// s(0) == 1, |c| == 1, entries of c may be exactly zero.
struct CoreResult {
    Vector z;
    double lambda = 0.0;
    Multiplicity mult = Multiplicity::unique;
    std::vector<Vector> alternates;
};

CoreResult solve_core(const Vector& s, const Vector& c, double root_tol);

// Entries with zero coefficient and non-minimal eigenvalue carry no mass
// at the optimum, so the problem shrinks to the surviving indices.
CoreResult strip_and_solve(const Vector& s, const Vector& c, double root_tol) {
    const Eigen::Index k = s.size();
    std::vector<Eigen::Index> keep;
    keep.reserve(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (i == 0 || c(i) != 0.0) keep.push_back(i);
    }
    if (static_cast<Eigen::Index>(keep.size()) == k) {
        return solve_core(s, c, root_tol);
    }
    Vector ss(keep.size()), cs(keep.size());
    for (size_t j = 0; j < keep.size(); ++j) {
        ss(j) = s(keep[j]);
        cs(j) = c(keep[j]);
    }
    CoreResult sub = solve_core(ss, cs, root_tol);
    auto expand = [&](const Vector& zs) {
        Vector z = Vector::Zero(k);
        for (size_t j = 0; j < keep.size(); ++j) z(keep[j]) = zs(j);
        return z;
    };
    CoreResult res;
    res.z = expand(sub.z);
    res.lambda = sub.lambda;
    res.mult = sub.mult;
    for (const Vector& a : sub.alternates) res.alternates.push_back(expand(a));
    return res;
}

CoreResult solve_core(const Vector& s, const Vector& c, double root_tol) {
    const Eigen::Index k = s.size();
    CoreResult res;
    if (c(0) != 0.0) {
        bool any_zero = false;
        for (Eigen::Index i = 1; i < k; ++i) any_zero |= (c(i) == 0.0);
        if (any_zero) return strip_and_solve(s, c, root_tol);
        secular::CanonicalSpectrum spec{s, c / c.norm()};
        const secular::RootResult rr = secular::solve_min_root(spec, root_tol);
        res.lambda = rr.root;
        res.z = Vector(k);
        for (Eigen::Index i = 0; i < k; ++i) res.z(i) = spec.c(i) / (res.lambda - s(i));
        res.z /= res.z.norm();
        res.mult = Multiplicity::unique;
        return res;
    }
    // c(0) == 0: mass on the smallest eigenvalue is free; the split between
    // it and the forced components is decided by d.
    bool any_zero = false;
    for (Eigen::Index i = 1; i < k; ++i) any_zero |= (c(i) == 0.0);
    if (any_zero) return strip_and_solve(s, c, root_tol);
    double d = 0.0;
    for (Eigen::Index i = 1; i < k; ++i) {
        const double den = s(i) - 1.0;
        d += c(i) * c(i) / (den * den);
    }
    if (d <= 1.0) {
        res.lambda = 1.0;
        res.z = Vector::Zero(k);
        for (Eigen::Index i = 1; i < k; ++i) res.z(i) = c(i) / (1.0 - s(i));
        const double z1 = std::sqrt(std::max(0.0, 1.0 - d));
        if (z1 > 0.0) {
            res.z(0) = z1;
            Vector alt = res.z;
            alt(0) = -z1;
            res.alternates.push_back(alt);
            res.mult = Multiplicity::sign_pair;
        } else {
            res.mult = Multiplicity::unique;
        }
        res.z /= res.z.norm();
        for (Vector& a : res.alternates) a /= a.norm();
        return res;
    }
    // d > 1: the smallest-eigenvalue coordinate is zero; re-shift so the
    // surviving spectrum again starts at 1 and recurse.
    const double shift = s(1) - 1.0;
    Vector ss = s.tail(k - 1).array() - shift;
    Vector cs = c.tail(k - 1);
    CoreResult sub = solve_core(ss, cs, root_tol);
    res.lambda = sub.lambda + shift;
    res.z = Vector::Zero(k);
    res.z.tail(k - 1) = sub.z;
    res.mult = sub.mult;
    for (const Vector& a : sub.alternates) {
        Vector za = Vector::Zero(k);
        za.tail(k - 1) = a;
        res.alternates.push_back(za);
    }
    return res;
}

Canonical canonicalize_from_evd(const linalg::Spectrum& spectrum,
                                const Vector& b, double zero_tol,
                                double dup_tol) {
    Canonical canon;
    canon.spectrum = spectrum;
    canon.b_norm = b.norm();
    if (canon.b_norm == 0.0) {
        throw InvalidInputError("canonicalize: b must be nonzero");
    }
    const Eigen::Index k = spectrum.eigenvalues.size();
    canon.s = (spectrum.eigenvalues.array() - spectrum.eigenvalues(0)) / canon.b_norm + 1.0;
    canon.s(0) = 1.0;
    canon.c = spectrum.eigenvectors.transpose() * (b / canon.b_norm);
    canon.c /= canon.c.norm();
    const double gap_tol = dup_tol * std::max(1.0, canon.s(k - 1));
    std::vector<int> group;
    for (Eigen::Index i = 0; i < k; ++i) {
        if (!group.empty() && canon.s(i) - canon.s(group.back()) > gap_tol) {
            canon.group_map.push_back(group);
            group.clear();
        }
        group.push_back(static_cast<int>(i));
    }
    canon.group_map.push_back(group);
    const double c_floor = zero_threshold(canon.c, zero_tol);
    for (size_t j = 0; j < canon.group_map.size(); ++j) {
        double norm_sq = 0.0;
        for (int idx : canon.group_map[j]) norm_sq += canon.c(idx) * canon.c(idx);
        if (std::sqrt(norm_sq) <= c_floor) {
            canon.zero_index_set.push_back(static_cast<int>(j));
        }
    }
    return canon;
}

// Spread a reduced coordinate back over its duplicate group, proportionally
// to the group's c entries; zero-c groups get the supplied fallback axis.
Vector back_map(const Canonical& canon, const std::vector<double>& group_norms,
                const Vector& z, const std::vector<int>& zero_axis) {
    const Eigen::Index k = canon.c.size();
    Vector xt = Vector::Zero(k);
    for (size_t j = 0; j < canon.group_map.size(); ++j) {
        if (z(j) == 0.0) continue;
        if (group_norms[j] > 0.0) {
            for (int idx : canon.group_map[j]) {
                xt(idx) = (z(j) / group_norms[j]) * canon.c(idx);
            }
        } else {
            xt(zero_axis[j]) = z(j);
        }
    }
    return xt;
}

Vector first_nonzero_normalized(Vector v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) != 0.0) {
            if (v(i) < 0.0) v = -v;
            break;
        }
    }
    return v;
}

bool first_nonzero_nonneg(const Vector& v, double tol = 1e-12) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > tol) return v(i) > 0.0;
    }
    return true;
}

}  // namespace

Canonical canonicalize(const Matrix& q, const Vector& b, double zero_tol,
                       double dup_tol) {
    if (q.rows() != q.cols() || q.rows() != b.size()) {
        throw InvalidInputError("canonicalize: dimension mismatch");
    }
    if (!b.allFinite()) {
        throw InvalidInputError("canonicalize: non-finite b");
    }
    return canonicalize_from_evd(linalg::sym_evd(q), b, zero_tol, dup_tol);
}

Reduced reduce_duplicates(const Canonical& canon) {
    Reduced red;
    const size_t j_count = canon.group_map.size();
    red.s = Vector(j_count);
    red.c = Vector(j_count);
    for (size_t j = 0; j < j_count; ++j) {
        red.s(j) = canon.s(canon.group_map[j].front());
        double norm_sq = 0.0;
        for (int idx : canon.group_map[j]) norm_sq += canon.c(idx) * canon.c(idx);
        red.c(j) = std::sqrt(norm_sq);
    }
    for (int j : canon.zero_index_set) red.c(j) = 0.0;
    red.s(0) = 1.0;
    const double norm = red.c.norm();
    if (norm > 0.0) red.c /= norm;
    return red;
}

Solution solve_with_evd(const linalg::Spectrum& spectrum, const Vector& b,
                        const Options& opts) {
    const Eigen::Index k = spectrum.eigenvalues.size();
    if (b.size() != k) {
        throw InvalidInputError("solve: dimension mismatch");
    }
    if (!b.allFinite()) {
        throw InvalidInputError("solve: non-finite b");
    }
    Solution sol;
    if (b.norm() == 0.0) {
        // Pure quadratic on the sphere: any smallest eigenvector minimizes.
        sol.x = first_nonzero_normalized(spectrum.eigenvectors.col(0));
        sol.multiplier = spectrum.eigenvalues(0);
        sol.objective = 0.5 * spectrum.eigenvalues(0);
        sol.multiplicity = Multiplicity::sphere_family;
        sol.alternates.push_back(-sol.x);
        return sol;
    }
    Canonical canon = canonicalize_from_evd(spectrum, b, opts.zero_tol, opts.dup_tol);
    Reduced red = reduce_duplicates(canon);
    CoreResult core = strip_and_solve(red.s, red.c, opts.root_tol);

    std::vector<double> group_norms(canon.group_map.size());
    std::vector<int> zero_axis(canon.group_map.size());
    for (size_t j = 0; j < canon.group_map.size(); ++j) {
        double norm_sq = 0.0;
        for (int idx : canon.group_map[j]) norm_sq += canon.c(idx) * canon.c(idx);
        group_norms[j] = std::sqrt(norm_sq);
        zero_axis[j] = canon.group_map[j].front();
    }
    for (int j : canon.zero_index_set) group_norms[j] = 0.0;

    // A zero-c group that receives mass (only group 0 can) spans a whole
    // sphere of minimizers when it has more than one member.
    if (!canon.zero_index_set.empty() && canon.zero_index_set.front() == 0 &&
        core.z(0) != 0.0 && canon.group_map[0].size() > 1) {
        core.mult = Multiplicity::sphere_family;
        Vector alt = core.z;
        core.alternates.push_back(alt);  // same z, second axis below
    }

    auto to_x = [&](const Vector& z, int axis_override) {
        std::vector<int> axes = zero_axis;
        if (axis_override >= 0) axes[0] = axis_override;
        Vector xt = back_map(canon, group_norms, z, axes);
        xt /= xt.norm();
        return Vector(canon.spectrum.eigenvectors * xt);
    };

    sol.x = to_x(core.z, -1);
    sol.multiplier = spectrum.eigenvalues(0) + canon.b_norm * (core.lambda - 1.0);
    sol.multiplicity = core.mult;
    for (size_t a = 0; a < core.alternates.size(); ++a) {
        const bool family_axis = core.mult == Multiplicity::sphere_family &&
                                 a + 1 == core.alternates.size() &&
                                 canon.group_map[0].size() > 1;
        sol.alternates.push_back(
            to_x(core.alternates[a], family_axis ? canon.group_map[0][1] : -1));
    }
    if (sol.multiplicity == Multiplicity::sign_pair && !sol.alternates.empty() &&
        !first_nonzero_nonneg(sol.x) && first_nonzero_nonneg(sol.alternates[0])) {
        std::swap(sol.x, sol.alternates[0]);
    }
    sol.objective = 0.5 * sol.x.dot(spectrum.eigenvectors *
                                    (spectrum.eigenvalues.asDiagonal() *
                                     (spectrum.eigenvectors.transpose() * sol.x))) +
                    b.dot(sol.x);
    return sol;
}

Solution solve(const Matrix& q, const Vector& b, const Options& opts) {
    if (q.rows() != q.cols() || q.rows() != b.size()) {
        throw InvalidInputError("solve: dimension mismatch");
    }
    return solve_with_evd(linalg::sym_evd(q), b, opts);
}

Solution solve_inequality(const Matrix& q, const Vector& b,
                          const Options& opts) {
    if (q.rows() != q.cols() || q.rows() != b.size()) {
        throw InvalidInputError("solve_inequality: dimension mismatch");
    }
    const Eigen::Index k = q.rows();
    // Slack expansion turns the ball constraint into a sphere constraint on
    // one extra coordinate with no objective contribution.
    Matrix qe = Matrix::Zero(k + 1, k + 1);
    qe.bottomRightCorner(k, k) = q;
    Vector be = Vector::Zero(k + 1);
    be.tail(k) = b;
    Solution expanded = solve_with_evd(linalg::sym_evd(qe), be, opts);

    Solution sol;
    sol.x = expanded.x.tail(k);
    sol.multiplier = expanded.multiplier;
    sol.objective = 0.5 * sol.x.dot(q * sol.x) + b.dot(sol.x);
    // Slack sign pairs collapse to one x; drop de-expanded duplicates.
    for (const Vector& a : expanded.alternates) {
        Vector ax = a.tail(k);
        bool dup = (ax - sol.x).norm() < 1e-10;
        for (const Vector& kept : sol.alternates) {
            dup = dup || (ax - kept).norm() < 1e-10;
        }
        if (!dup) sol.alternates.push_back(ax);
    }
    sol.multiplicity = sol.alternates.empty() ? Multiplicity::unique
                                              : expanded.multiplicity;
    return sol;
}

MatrixSolution solve_matrix(const Matrix& q, const Matrix& b,
                            const Options& opts) {
    if (q.rows() != q.cols() || q.rows() != b.rows()) {
        throw InvalidInputError("solve_matrix: dimension mismatch");
    }
    const Eigen::Index dim = q.rows();
    const Eigen::Index r = b.cols();
    linalg::Spectrum spectrum = linalg::sym_evd(q);
    MatrixSolution out;
    if (b.norm() == 0.0) {
        out.x = spectrum.eigenvectors.col(0) * Eigen::RowVectorXd::Unit(r, 0);
        out.objective = 0.5 * spectrum.eigenvalues(0);
        return out;
    }
    // Rows of U^T X align with B^T u_i; only the row norms remain unknown,
    // which is a dim-sized sphere problem.
    Matrix rows = b.transpose() * spectrum.eigenvectors;  // column i = B^T u_i
    Vector c(dim);
    for (Eigen::Index i = 0; i < dim; ++i) c(i) = rows.col(i).norm();
    Solution reduced = solve_with_evd(
        linalg::Spectrum{spectrum.eigenvalues, Matrix::Identity(dim, dim)}, c,
        opts);
    const double c_floor = zero_threshold(c, opts.zero_tol);
    Matrix xt(dim, r);
    for (Eigen::Index i = 0; i < dim; ++i) {
        if (c(i) > c_floor) {
            xt.row(i) = (reduced.x(i) / c(i)) * rows.col(i).transpose();
        } else {
            xt.row(i) = reduced.x(i) * Eigen::RowVectorXd::Unit(r, 0);
        }
    }
    out.x = spectrum.eigenvectors * xt;
    out.x /= out.x.norm();
    out.objective = 0.5 * (out.x.transpose() * q * out.x).trace() +
                    (b.transpose() * out.x).trace();
    return out;
}

}  // namespace sphereqp::scqp
