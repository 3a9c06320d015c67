#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sphereqp/bounded_regression.hpp"

using namespace sphereqp;
namespace br = bounded_regression;

namespace {

br::Problem random_tall(std::mt19937_64& rng, int rows, int cols,
                        double delta_frac) {
    br::Problem p;
    std::normal_distribution<double> gauss(0.0, 1.0);
    p.a.resize(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) p.a(r, c) = gauss(rng);
    p.y = oracles::random_vector(rng, rows);
    const double floor =
        (p.y - p.a * p.a.colPivHouseholderQr().solve(p.y)).norm();
    p.delta = floor + delta_frac * (p.y.norm() - floor);
    return p;
}

}  // namespace

TEST_CASE("bound classification on the identity design") {
    br::Problem p;
    p.a = Matrix::Identity(3, 3);
    p.y = Vector::Ones(3);
    p.delta = 0.5;
    auto info = br::validate_bound(p);
    CHECK(info.cls == br::BoundClass::feasible);
    CHECK(info.residual_floor == doctest::Approx(0.0).epsilon(1e-12));
    p.delta = p.y.norm() + 0.1;
    CHECK(br::validate_bound(p).cls == br::BoundClass::zero_solution);
}

TEST_CASE("delta below the residual floor is infeasible") {
    br::Problem p;
    p.a = Matrix::Zero(3, 1);
    p.a(0, 0) = 1.0;
    p.y = Vector::Ones(3);
    p.delta = 0.5;  // floor is sqrt(2)
    auto info = br::validate_bound(p);
    CHECK(info.cls == br::BoundClass::infeasible);
    CHECK(info.residual_floor == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(br::solve(p), InvalidInputError);
}

TEST_CASE("identity design has the shrinkage closed form") {
    br::Problem p;
    p.a = Matrix::Identity(3, 3);
    p.y.resize(3);
    p.y << 3.0, 0.0, 4.0;
    p.delta = 1.0;
    const Vector x = br::solve(p);
    // min |x| with |y - x| = 1: shrink y by 1 along itself.
    const Vector expect = p.y * (1.0 - 1.0 / p.y.norm());
    CHECK((x - expect).norm() < 1e-10);
}

TEST_CASE("delta at the floor returns the least-squares point") {
    std::mt19937_64 rng(51);
    const auto p0 = random_tall(rng, 8, 3, 0.0);
    br::Problem p = p0;
    const Vector ls = p.a.colPivHouseholderQr().solve(p.y);
    p.delta = (p.y - p.a * ls).norm();
    const Vector x = br::solve(p);
    CHECK((x - ls).norm() < 1e-7 * (1.0 + ls.norm()));
}

TEST_CASE("tall solve matches the regularization path") {
    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 15; ++trial) {
        const auto p = random_tall(rng, 9, 4, 0.1 + 0.05 * trial);
        const Vector x = br::solve_tall(p);
        CHECK((p.y - p.a * x).norm() == doctest::Approx(p.delta).epsilon(1e-9));
        const Vector ref = oracles::tikhonov_path_oracle(p.a, p.y, p.delta);
        CHECK(x.norm() <= ref.norm() + 1e-6);
        CHECK((x - ref).norm() < 1e-5 * (1.0 + ref.norm()));
    }
}

TEST_CASE("rank-deficient design still satisfies the constraint") {
    std::mt19937_64 rng(53);
    br::Problem p;
    p.a.resize(6, 3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 2; ++c) p.a(r, c) = gauss(rng);
    p.a.col(2) = p.a.col(0) + p.a.col(1);  // exact rank 2
    p.y = oracles::random_vector(rng, 6);
    const double floor =
        (p.y - p.a * p.a.colPivHouseholderQr().solve(p.y)).norm();
    p.delta = floor + 0.4 * (p.y.norm() - floor);
    const Vector x = br::solve_tall(p);
    CHECK((p.y - p.a * x).norm() == doctest::Approx(p.delta).epsilon(1e-9));
    const Vector ref = oracles::tikhonov_path_oracle(p.a, p.y, p.delta);
    CHECK(x.norm() <= ref.norm() + 1e-6);
}

TEST_CASE("feasible_start lands on the constraint") {
    std::mt19937_64 rng(54);
    br::Problem p;
    p.a.resize(4, 10);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 10; ++c) p.a(r, c) = gauss(rng);
    p.y = oracles::random_vector(rng, 4);
    p.delta = 0.3 * p.y.norm();
    const Vector x0 = br::feasible_start(p);
    CHECK((p.y - p.a * x0).norm() == doctest::Approx(p.delta).epsilon(1e-9));
}

TEST_CASE("wide passes keep the constraint and shrink the norm") {
    std::mt19937_64 rng(55);
    br::Problem p;
    p.a.resize(5, 20);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 20; ++c) p.a(r, c) = gauss(rng);
    p.y = oracles::random_vector(rng, 5);
    p.delta = 0.25 * p.y.norm();
    Vector x = br::feasible_start(p);
    double prev_norm = x.norm();
    br::Options opts;
    opts.max_passes = 1;
    for (int pass = 0; pass < 12; ++pass) {
        opts.seed = 100 + pass;
        x = br::solve_wide(p, x, opts);
        CHECK((p.y - p.a * x).norm() ==
              doctest::Approx(p.delta).epsilon(1e-8));
        CHECK(x.norm() <= prev_norm + 1e-10);
        prev_norm = x.norm();
    }
    const Vector ref = oracles::tikhonov_path_oracle(p.a, p.y, p.delta);
    CHECK(x.norm() <= ref.norm() * (1.0 + 1e-4));
}

TEST_CASE("wide dispatcher approaches the path oracle") {
    std::mt19937_64 rng(56);
    for (int trial = 0; trial < 6; ++trial) {
        br::Problem p;
        p.a.resize(6, 18);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 18; ++c) p.a(r, c) = gauss(rng);
        p.y = oracles::random_vector(rng, 6);
        p.delta = 0.3 * p.y.norm();
        br::Options opts;
        opts.seed = trial;
        const Vector x = br::solve(p, opts);
        CHECK((p.y - p.a * x).norm() ==
              doctest::Approx(p.delta).epsilon(1e-8));
        const Vector ref = oracles::tikhonov_path_oracle(p.a, p.y, p.delta);
        CHECK(x.norm() <= ref.norm() * (1.0 + 1e-4));
        CHECK(x.norm() >= ref.norm() * (1.0 - 1e-4));
    }
}

TEST_CASE("zero bound class returns the zero vector") {
    br::Problem p;
    p.a = Matrix::Identity(2, 2);
    p.y = Vector::Ones(2);
    p.delta = 10.0;
    CHECK(br::solve(p).norm() == 0.0);
}
