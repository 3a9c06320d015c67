#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphereqp/qcqp.hpp"
#include "sphereqp/scqp.hpp"

using namespace sphereqp;

namespace {

Matrix diag_spd(std::initializer_list<double> d) {
    Matrix m = Matrix::Zero(std::ssize(d), std::ssize(d));
    int i = 0;
    for (double v : d) m(i, i) = v, ++i;
    return m;
}

double frob_combo_norm(const std::vector<Matrix>& h, double alpha) {
    return (alpha * h[0] + (1.0 - alpha) * h[1]).norm();
}

}  // namespace

TEST_CASE("psd combination with one matrix is trivial") {
    std::vector<Matrix> h{diag_spd({2.0, 3.0})};
    const auto [combo, alpha] = qcqp::generate_psd_combination(h);
    REQUIRE(alpha.size() == 1);
    CHECK(alpha(0) == doctest::Approx(1.0));
    CHECK((combo - h[0]).norm() < 1e-14);
}

TEST_CASE("duplicate matrices split the weight evenly") {
    std::vector<Matrix> h{diag_spd({1.0, 2.0}), diag_spd({1.0, 2.0})};
    const auto [combo, alpha] = qcqp::generate_psd_combination(h);
    CHECK(alpha(0) == doctest::Approx(0.5));
    CHECK(alpha(1) == doctest::Approx(0.5));
}

TEST_CASE("two-matrix combination matches the clamped closed form") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Matrix> h{oracles::random_spd(rng, 4),
                              oracles::random_spd(rng, 4)};
        const auto [combo, alpha] = qcqp::generate_psd_combination(h);
        const Matrix diff = h[0] - h[1];
        // Closed form: minimize |a H0 + (1-a) H1|_F^2 over a in [0, 1].
        const double a_star = std::min(
            1.0, std::max(0.0, (h[1].cwiseProduct(h[1] - h[0])).sum() /
                                   diff.squaredNorm()));
        CHECK(alpha(0) == doctest::Approx(a_star).epsilon(1e-8));
        CHECK(alpha(1) == doctest::Approx(1.0 - a_star).epsilon(1e-8));
        CHECK(alpha.minCoeff() >= -1e-12);
        CHECK(alpha.sum() == doctest::Approx(1.0).epsilon(1e-12));
        // No grid point on the segment beats the reported combination.
        for (int g = 0; g <= 100; ++g) {
            CHECK(combo.norm() <= frob_combo_norm(h, g / 100.0) + 1e-9);
        }
    }
}

TEST_CASE("larger families stay optimal against random simplex probes") {
    std::mt19937_64 rng(62);
    std::vector<Matrix> h;
    for (int m = 0; m < 5; ++m) h.push_back(oracles::random_spd(rng, 3));
    const auto [combo, alpha] = qcqp::generate_psd_combination(h);
    CHECK(alpha.sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(alpha.minCoeff() >= -1e-12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int probe = 0; probe < 500; ++probe) {
        Vector w(5);
        for (int m = 0; m < 5; ++m) w(m) = -std::log(unit(rng));
        w /= w.sum();
        Matrix cand = Matrix::Zero(3, 3);
        for (int m = 0; m < 5; ++m) cand += w(m) * h[m];
        CHECK(combo.norm() <= cand.norm() + 1e-8);
    }
}

TEST_CASE("carrier selection by condition number") {
    // Condition numbers 185.7, 12403, 1000.1: the first must win.
    std::vector<Matrix> h{diag_spd({1.0, 185.7}), diag_spd({1.0, 12403.0}),
                          diag_spd({1.0, 1000.1})};
    qcqp::Options opts;
    opts.carrier = qcqp::CarrierPolicy::min_condition;
    const auto sel = qcqp::select_sphere_matrix(h, opts);
    CHECK(sel.index == 0);
    CHECK((sel.carrier - h[0]).norm() < 1e-14);

    opts.carrier = qcqp::CarrierPolicy::given_index;
    opts.carrier_index = 2;
    CHECK(qcqp::select_sphere_matrix(h, opts).index == 2);
}

TEST_CASE("min_condition skips numerically singular candidates") {
    Matrix sing = Matrix::Zero(2, 2);
    sing(0, 0) = 1.0;  // semidefinite, must not be picked
    std::vector<Matrix> h{sing, diag_spd({1.0, 4.0})};
    qcqp::Options opts;
    opts.carrier = qcqp::CarrierPolicy::min_condition;
    CHECK(qcqp::select_sphere_matrix(h, opts).index == 1);
}

TEST_CASE("frobenius carrier is the simplex combination") {
    std::mt19937_64 rng(63);
    std::vector<Matrix> h{oracles::random_spd(rng, 3),
                          oracles::random_spd(rng, 3)};
    qcqp::Options opts;
    opts.carrier = qcqp::CarrierPolicy::frobenius_combination;
    const auto sel = qcqp::select_sphere_matrix(h, opts);
    REQUIRE(sel.alpha.size() == 2);
    Matrix combo = sel.alpha(0) * h[0] + sel.alpha(1) * h[1];
    CHECK((sel.carrier - combo).norm() < 1e-12);
}

TEST_CASE("identity carrier reparameterization is a no-op") {
    std::mt19937_64 rng(64);
    qcqp::Problem p;
    p.q = oracles::random_symmetric(rng, 4);
    p.b = oracles::random_vector(rng, 4);
    p.h = {Matrix::Identity(4, 4), oracles::random_spd(rng, 4)};
    const auto rep = qcqp::reparameterize(p, p.h[0]);
    CHECK((rep.f - Matrix::Identity(4, 4)).norm() < 1e-14);
    CHECK((rep.q_t - p.q).norm() < 1e-12);
    CHECK((rep.b_t - p.b).norm() < 1e-12);
}

TEST_CASE("scaled identity carrier rescales the data") {
    qcqp::Problem p;
    p.q = diag_spd({2.0, 6.0});
    p.b = Vector::Ones(2);
    p.h = {4.0 * Matrix::Identity(2, 2)};
    const auto rep = qcqp::reparameterize(p, p.h[0]);
    CHECK((rep.f - 2.0 * Matrix::Identity(2, 2)).norm() < 1e-13);
    CHECK((rep.q_t - p.q / 4.0).norm() < 1e-13);
    CHECK((rep.b_t - p.b / 2.0).norm() < 1e-13);
}

TEST_CASE("whitened constraints encode the original residuals") {
    std::mt19937_64 rng(65);
    qcqp::Problem p;
    p.q = oracles::random_symmetric(rng, 5);
    p.b = oracles::random_vector(rng, 5);
    p.h = {oracles::random_spd(rng, 5), oracles::random_spd(rng, 5),
           oracles::random_spd(rng, 5)};
    const Matrix carrier = p.h[1];
    const auto rep = qcqp::reparameterize(p, carrier);
    REQUIRE(rep.d_t.size() == p.h.size());
    for (int probe = 0; probe < 20; ++probe) {
        Vector xt = oracles::random_vector(rng, 5);
        xt /= xt.norm();
        const Vector x = rep.f.transpose().fullPivLu().solve(xt);
        CHECK(x.dot(carrier * x) == doctest::Approx(1.0).epsilon(1e-10));
        for (size_t n = 0; n < p.h.size(); ++n) {
            const double whitened = xt.dot(rep.d_t[n] * xt);
            const double original = 1.0 - x.dot(p.h[n] * x);
            CHECK(whitened == doctest::Approx(original).epsilon(1e-9));
        }
    }
}

TEST_CASE("single identity constraint reduces to the sphere QP") {
    std::mt19937_64 rng(66);
    for (int trial = 0; trial < 10; ++trial) {
        const int k = 5;
        qcqp::Problem p;
        p.q = oracles::random_symmetric(rng, k, 2.0);
        p.b = oracles::random_vector(rng, k);
        p.h = {Matrix::Identity(k, k)};
        const auto res = qcqp::solve(p);
        const auto ref = scqp::solve(p.q, p.b);
        CHECK(res.converged);
        CHECK(res.feasibility < 1e-8);
        CHECK(res.objective == doctest::Approx(ref.objective).epsilon(1e-9));
    }
}

TEST_CASE("two-ellipsoid problem reaches feasibility") {
    std::mt19937_64 rng(67);
    qcqp::Problem p;
    const int k = 6;
    p.q = oracles::random_symmetric(rng, k, 1.0);
    p.b = oracles::random_vector(rng, k);
    p.h = {oracles::random_spd(rng, k), oracles::random_spd(rng, k)};
    const auto res = qcqp::solve(p);
    CHECK(res.feasibility < 1e-6);
    for (const auto& hm : p.h) {
        CHECK(res.x.dot(hm * res.x) == doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("exact and linearized modes agree") {
    std::mt19937_64 rng(68);
    qcqp::Problem p;
    const int k = 6;
    p.q = oracles::random_symmetric(rng, k, 1.0);
    p.b = oracles::random_vector(rng, k);
    p.h = {oracles::random_spd(rng, k), oracles::random_spd(rng, k)};
    qcqp::Options opts;
    opts.mode = qcqp::Mode::exact;
    const auto exact = qcqp::solve(p, opts);
    opts.mode = qcqp::Mode::linearized;
    const auto lin = qcqp::solve(p, opts);
    CHECK(exact.feasibility < 1e-6);
    CHECK(lin.feasibility < 1e-6);
    CHECK(std::abs(exact.objective - lin.objective) <
          1e-4 * (1.0 + std::abs(exact.objective)));
}

TEST_CASE("trace collection records the iteration history") {
    std::mt19937_64 rng(69);
    qcqp::Problem p;
    p.q = oracles::random_symmetric(rng, 4);
    p.b = oracles::random_vector(rng, 4);
    p.h = {Matrix::Identity(4, 4)};
    qcqp::Options opts;
    opts.collect_trace = true;
    const auto res = qcqp::solve(p, opts);
    REQUIRE(!res.trace.empty());
    CHECK(res.trace.front().iteration == 0);
    for (const auto& rec : res.trace) {
        CHECK(rec.gamma > 0.0);
        CHECK(rec.primal_residual >= 0.0);
    }
}

TEST_CASE("inequality lift matches the ball-constrained sphere QP") {
    std::mt19937_64 rng(70);
    const int k = 3;
    const Matrix q = oracles::random_spd(rng, k);
    Vector b = oracles::random_vector(rng, k);
    b *= 3.0 / b.norm();  // strong enough that the ball bound is active
    const auto lifted =
        qcqp::lift_inequalities(q, b, {}, {Matrix::Identity(k, k)});
    REQUIRE(lifted.q.rows() == k + 1);
    REQUIRE(lifted.h.size() == 1);
    CHECK(lifted.h[0](k, k) == doctest::Approx(1.0));
    const auto res = qcqp::solve(lifted);
    const auto ref = scqp::solve_inequality(q, b);
    CHECK(res.feasibility < 1e-8);
    CHECK((res.x.head(k) - ref.x).norm() < 1e-6);
}

TEST_CASE("solve is deterministic") {
    std::mt19937_64 rng(71);
    qcqp::Problem p;
    const int k = 5;
    p.q = oracles::random_symmetric(rng, k);
    p.b = oracles::random_vector(rng, k);
    p.h = {oracles::random_spd(rng, k), oracles::random_spd(rng, k)};
    const auto a1 = qcqp::solve(p);
    const auto a2 = qcqp::solve(p);
    CHECK((a1.x - a2.x).norm() == 0.0);
    CHECK(a1.iterations == a2.iterations);
}
