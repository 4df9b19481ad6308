#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "spca/sampling.hpp"
#include "spca/solver.hpp"
#include "spca/theory.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace spca;

namespace {

MatrixXd two_points() {
    MatrixXd m(2, 2);
    m << 1, 0, 2, 0;
    return m;
}

MatrixXd random_mat(Rng& rng, int n, int p, double scale = 1.0) {
    MatrixXd m(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) m(i, j) = scale * rng.normal();
    return m;
}

}  // namespace

TEST_CASE("step scale on hand-checked points") {
    DataSet d(two_points());
    CHECK(step_scale(VectorXd::Zero(2), d) == doctest::Approx(2.0).epsilon(1e-14));
    VectorXd v(2);
    v << 0.5, 0;
    CHECK(step_scale(v, d) == doctest::Approx(2.8).epsilon(1e-14));
}

TEST_CASE("step scale is at least two away from sample points") {
    Rng rng(101);
    for (int trial = 0; trial < 40; ++trial) {
        const int p = 1 + static_cast<int>(rng.next_u64() % 4);
        DataSet d(random_mat(rng, 1 + static_cast<int>(rng.next_u64() % 20), p));
        VectorXd v(p);
        for (int j = 0; j < p; ++j) v[j] = rng.normal();
        if (classify_sample_point(v, d)) continue;
        CHECK(step_scale(v, d) >= 2.0 * (1.0 - 1e-14));
    }
}

TEST_CASE("step scale excludes the coincident term and can become undefined") {
    DataSet d(two_points());
    VectorXd v(2);
    v << 1, 0;  // equals X_1, term 1 excluded
    // remaining term i=2: (||v+x||^2 + ||v-x||^2)/(||v-x|| ||v+x||) = (9+1)/3
    CHECK(step_scale(v, d) == doctest::Approx(0.5 * 10.0 / 3.0).epsilon(1e-12));

    MatrixXd one(1, 2);
    one << 1, 0;
    CHECK_THROWS_AS(step_scale(v, DataSet(one)), UndefinedScale);
}

TEST_CASE("weiszfeld step on hand-checked points") {
    DataSet d(two_points());
    CHECK(weiszfeld_step(VectorXd::Zero(2), d).norm() == 0.0);

    VectorXd v(2);
    v << 0.5, 0;
    const VectorXd t = weiszfeld_step(v, d);
    CHECK(t[0] == doctest::Approx(6.0 / 7.0).epsilon(1e-13));
    CHECK(t[1] == 0.0);

    v << 1, 0;
    CHECK_THROWS_AS(weiszfeld_step(v, d), SamplePointHit);
}

TEST_CASE("weiszfeld equals gradient descent with step 1/L") {
    Rng rng(202);
    for (int trial = 0; trial < 50; ++trial) {
        const int p = 2 + static_cast<int>(rng.next_u64() % 3);
        DataSet d(random_mat(rng, 25, p));
        VectorXd v(p);
        for (int j = 0; j < p; ++j) v[j] = rng.normal();
        if (classify_sample_point(v, d)) continue;
        const VectorXd lhs = weiszfeld_step(v, d);
        const VectorXd rhs = v - gradient(v, d) / step_scale(v, d);
        CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("weiszfeld step descends and never flips sign") {
    Rng rng(303);
    for (int trial = 0; trial < 60; ++trial) {
        const int p = 1 + static_cast<int>(rng.next_u64() % 4);
        DataSet d(random_mat(rng, 2 + static_cast<int>(rng.next_u64() % 20), p));
        VectorXd v(p);
        for (int j = 0; j < p; ++j) v[j] = rng.normal();
        if (classify_sample_point(v, d)) continue;
        const VectorXd t = weiszfeld_step(v, d);
        CHECK(objective_value(t, d) <= objective_value(v, d) + 1e-12);
        if (v.norm() > 1e-8) CHECK((t + v).norm() > 1e-12);  // T(v) != -v for v != 0
    }
}

TEST_CASE("escape step: stationary points are fixed") {
    // {x, -x}: at X_1 the clamp is <= 0, the point is already stationary
    MatrixXd m(2, 2);
    m << 2, 1, -2, -1;
    DataSet d(m);
    const VectorXd out = escape_step(0, +1, d);
    CHECK((out - d.row(0)).norm() == 0.0);
}

TEST_CASE("escape step strictly descends on the 1-D probe set") {
    MatrixXd m(3, 1);
    m << 1, 3, 3.2;
    DataSet d(m);
    const VectorXd w = d.row(0);
    const VectorXd out = escape_step(0, +1, d);
    CHECK(objective_value(out, d) < objective_value(w, d));
    // epsilon < M keeps the escape away from the mirror point -X_1
    CHECK((out + w).norm() > 1e-9);
    // independent 1-D scan: the escape direction must point toward the bulk
    CHECK(out[0] > 1.0);
}

TEST_CASE("radius bound on unit-norm data") {
    MatrixXd m(4, 2);
    m << 1, 0, -1, 0, 0, 1, 0, -1;
    const RadiusBound rb = radius_bound(DataSet(m));
    CHECK(rb.R0 == doctest::Approx(1.0));
    CHECK(rb.coefficient == doctest::Approx(1.0));
    CHECK(rb.H == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("radius bound scale equivariance and coefficient floor") {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        const int p = 1 + static_cast<int>(rng.next_u64() % 4);
        DataSet d(random_mat(rng, 3 + static_cast<int>(rng.next_u64() % 30), p));
        const RadiusBound rb = radius_bound(d);
        CHECK(rb.coefficient >= 0.5 - 1e-14);
        const double b = 0.5 + 4.0 * rng.uniform01();
        const RadiusBound rb2 = radius_bound(DataSet(b * d.rows()));
        CHECK(rb2.R0 == doctest::Approx(b * rb.R0).epsilon(1e-12));
        CHECK(rb2.H - 1.0 == doctest::Approx(b * (rb.H - 1.0)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(radius_bound(DataSet(MatrixXd::Zero(3, 2))), AllZeroData);
}

TEST_CASE("ray line search: median of squares in one dimension") {
    MatrixXd m(4, 1);
    m << 1, -1, 1, -1;
    VectorXd u(1);
    u << 1;
    CHECK(ray_line_search(u, DataSet(m)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ray line search satisfies a derivative sign change") {
    Rng rng(505);
    DataSet d(random_mat(rng, 30, 2, 2.0));
    VectorXd u(2);
    u << std::cos(0.3), std::sin(0.3);
    const double lam = ray_line_search(u, d);
    const double t_opt = lam * lam;
    const auto g = [&](double t) { return objective_value(VectorXd(std::sqrt(t) * u), d); };
    const double h = 1e-4 * (1.0 + t_opt);
    CHECK(g(t_opt + h) >= g(t_opt) - 1e-12);
    if (t_opt > h) CHECK(g(t_opt - h) >= g(t_opt) - 1e-12);
}

TEST_CASE("ray line search recovers the normal MAD at scale") {
    const DataSet d = sample_spherical(Radial{Radial::Gaussian, 0}, 1, 100000, 606);
    VectorXd u(1);
    u << 1;
    const double lam = ray_line_search(u, d);
    CHECK(std::abs(lam - 0.6745) < 0.02);
}

TEST_CASE("escape step mirrors under negation of the query point") {
    MatrixXd m(3, 1);
    m << 1, 3, 3.2;
    DataSet d(m);
    const VectorXd from_minus = escape_step(0, -1, d);
    const VectorXd from_plus = escape_step(0, +1, d);
    CHECK(from_minus[0] == doctest::Approx(-from_plus[0]).epsilon(1e-12));
    CHECK(objective_value(from_minus, d) < objective_value(VectorXd(-d.row(0)), d));
}

TEST_CASE("ray line search rejects sample directions in p >= 2") {
    DataSet d(two_points());
    VectorXd u(2);
    u << 1, 0;
    CHECK_THROWS_AS(ray_line_search(u, d), DirectionAtSamplePoint);
    CHECK_THROWS_AS(ray_line_search(VectorXd(2 * u), d), Error);  // non-unit
}

TEST_CASE("pca leading eigenpair") {
    MatrixXd m(4, 2);
    m << 1, 0, -1, 0, 1, 0, -1, 0;
    const EigenPair e = pca_leading(DataSet(m));
    CHECK(e.vector[0] == doctest::Approx(1.0));
    CHECK(std::abs(e.vector[1]) < 1e-12);
    CHECK(e.value == doctest::Approx(1.0));  // population-style 1/n variance

    CHECK_THROWS_AS(pca_leading(DataSet(MatrixXd::Ones(3, 2))), DegenerateData);
}

TEST_CASE("pca rotation equivariance") {
    Rng rng(606);
    const DataSet d(random_mat(rng, 200, 3, 1.5));
    const MatrixXd o = random_orthogonal(3, 99);
    const EigenPair base = pca_leading(d);
    const EigenPair rot = pca_leading(DataSet(d.rows() * o.transpose()));
    const VectorXd expected = o * base.vector;
    const double align = std::abs(expected.dot(rot.vector));
    CHECK(align == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(rot.value == doctest::Approx(base.value).epsilon(1e-10));
}

TEST_CASE("pca sanity against a spiked covariance") {
    const DataSet d =
        sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 5000, 1234);
    const EigenPair e = pca_leading(d);
    CHECK(std::abs(e.vector[0]) > 0.99);
    CHECK(e.value == doctest::Approx(9.0).epsilon(0.10));
}

TEST_CASE("solve on the mirrored-pair data set") {
    MatrixXd m(2, 2);
    m << 2, 1, -2, -1;
    const SolverResult res = solve(DataSet(m));
    CHECK(res.status == SolverStatus::Converged);
    CHECK(res.norm == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
    REQUIRE(res.direction.has_value());
    CHECK(std::abs((*res.direction)[0]) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-9));
}

TEST_CASE("solve recovers the spiked direction at lambda 3, p 2") {
    const DataSet d = sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 2000, 42);
    const SolverResult res = solve(d);
    CHECK(res.status == SolverStatus::Converged);
    REQUIRE(res.direction.has_value());
    CHECK(std::abs((*res.direction)[0]) > 0.98);
    CHECK(res.objective == doctest::Approx(objective_value(res.v, d)).epsilon(1e-14));
}

TEST_CASE("solve collapses below the p = 3 threshold") {
    const DataSet d =
        sample_elliptical(EllipticalSpec::gaussian(3, std::sqrt(3.0), 1.0), 2000, 7);
    const SolverResult res = solve(d);
    CHECK(res.norm < 0.15);
}

TEST_CASE("solve on a single observation returns the point itself") {
    MatrixXd m(1, 2);
    m << 1, 0;
    const SolverResult res = solve(DataSet(m));
    CHECK(res.norm == doctest::Approx(1.0).epsilon(1e-8));
    REQUIRE(res.direction.has_value());
    CHECK((*res.direction)[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("solve rejects all-zero data") {
    CHECK_THROWS_AS(solve(DataSet(MatrixXd::Zero(4, 2))), AllZeroData);
}

TEST_CASE("monotone descent along recorded traces") {
    Rng rng(707);
    SolverConfig cfg;
    cfg.record_trace = true;
    for (int trial = 0; trial < 60; ++trial) {
        const int p = 1 + static_cast<int>(rng.next_u64() % 5);
        const int n = 1 + static_cast<int>(rng.next_u64() % 50);
        const DataSet d(random_mat(rng, n, p, 1.0 + 2.0 * rng.uniform01()));
        if (d.all_zero()) continue;
        const SolverResult res = solve(d, cfg);
        for (std::size_t k = 1; k < res.trace.size(); ++k)
            CHECK(res.trace[k] <= res.trace[k - 1] + 1e-10 * (1.0 + std::abs(res.trace[k - 1])));
        CHECK(res.step12_resets <= static_cast<int>(d.n()));
        CHECK(res.norm <= res.radius.H + 0.5 + 1e-9 * (1.0 + res.radius.H));
    }
}

TEST_CASE("solve rotation equivariance") {
    Rng rng(808);
    const DataSet d(random_mat(rng, 300, 3, 2.0));
    const MatrixXd o = random_orthogonal(3, 4321);
    const SolverResult base = solve(d);
    const SolverResult rot = solve(DataSet(d.rows() * o.transpose()));
    const VectorXd expected = o * base.v;
    const double err = std::min((rot.v - expected).norm(), (rot.v + expected).norm());
    CHECK(err <= 1e-6 * (1.0 + expected.norm()));
}

TEST_CASE("solve scale equivariance") {
    const DataSet d = sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 250, 909);
    const SolverResult base = solve(d);
    const double b = 3.7;
    const SolverResult scaled = solve(DataSet(b * d.rows()));
    CHECK(scaled.norm == doctest::Approx(b * base.norm).epsilon(1e-6));
    REQUIRE(base.direction.has_value());
    REQUIRE(scaled.direction.has_value());
    CHECK((*scaled.direction - *base.direction).norm() < 1e-6);
}

TEST_CASE("solve handles duplicated Bernoulli-style support without escape loops") {
    const DataSet d = sample_margins(MarginSpec(MarginSpec::Bernoulli, 2.5), 200, 31);
    SolverConfig cfg;
    cfg.record_trace = true;
    const SolverResult res = solve(d, cfg);
    CHECK(res.status == SolverStatus::Converged);
    CHECK(res.step12_resets <= static_cast<int>(d.n()));
    for (std::size_t k = 1; k < res.trace.size(); ++k)
        CHECK(res.trace[k] <= res.trace[k - 1] + 1e-10 * (1.0 + std::abs(res.trace[k - 1])));
    CHECK(std::abs(res.v[0]) > 1.0);  // theta = 2.5 is far above the cut-off
}

TEST_CASE("fitted norm approximates and never exceeds the radius bound") {
    const DataSet d = sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 500, 3131);
    const SolverResult res = solve(d);
    CHECK(res.norm <= res.radius.H + 0.5);
}

TEST_CASE("solve accepts an init sitting on a sample point") {
    MatrixXd m(3, 1);
    m << 1, 3, 3.2;
    DataSet d(m);
    SolverConfig cfg;
    cfg.record_trace = true;
    const SolverResult res = solve(d, cfg, Eigen::VectorXd::Ones(1));  // exactly X_1
    CHECK(res.status == SolverStatus::Converged);
    CHECK(res.escape_steps_taken >= 1);
    // the 1-D optimum is the middle squared observation, i.e. |v| = 3
    CHECK(res.norm == doctest::Approx(3.0).epsilon(1e-6));
    for (std::size_t k = 1; k < res.trace.size(); ++k)
        CHECK(res.trace[k] <= res.trace[k - 1] + 1e-10 * (1.0 + std::abs(res.trace[k - 1])));
}

TEST_CASE("solve from the origin stays at the documented fixed point") {
    const DataSet d = sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 100, 55);
    const SolverResult res = solve(d, {}, Eigen::VectorXd::Zero(2));
    CHECK(res.status == SolverStatus::Converged);
    CHECK(res.norm == 0.0);
    CHECK_FALSE(res.direction.has_value());
}

TEST_CASE("solve validates the init dimension") {
    const DataSet d = sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 50, 56);
    CHECK_THROWS_AS(solve(d, {}, Eigen::VectorXd::Ones(3)), DimensionMismatch);
}

TEST_CASE("solve max-iter status") {
    const DataSet d = sample_elliptical(EllipticalSpec::gaussian(2, 3.0, 1.0), 400, 77);
    SolverConfig cfg;
    cfg.max_iter = 1;
    const SolverResult res = solve(d, cfg);
    CHECK(res.status == SolverStatus::MaxIterReached);
    CHECK(res.iterations == 1);
}
