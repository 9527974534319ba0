#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "segbreak/break_search.hpp"
#include "segbreak/trend_model.hpp"

using namespace segbreak;

TEST_SUITE_BEGIN("trend_model");

TEST_CASE("slope_basis evaluates max(t - k, 0)") {
    Eigen::VectorXd b = slope_basis(5, 3);
    Eigen::VectorXd expected(5);
    expected << 0, 0, 0, 1, 2;
    CHECK(b.isApprox(expected));

    CHECK(slope_basis(4, 4).isZero());  // break at the last period contributes nothing

    Eigen::VectorXd early = slope_basis(3, 1);
    Eigen::VectorXd expected_early(3);
    expected_early << 0, 1, 2;
    CHECK(early.isApprox(expected_early));
}

TEST_CASE("slope_basis rejects out-of-range dates") {
    CHECK_THROWS_AS(slope_basis(5, 0), std::invalid_argument);
    CHECK_THROWS_AS(slope_basis(5, 6), std::invalid_argument);
}

TEST_CASE("slope_basis is continuous at the break: no level jump") {
    const int T = 20, k = 9;
    Eigen::VectorXd b = slope_basis(T, k);
    CHECK(b[k - 1] == 0.0);      // value at the break date itself
    CHECK(b[k - 2] == 0.0);      // still zero before
    CHECK(b[k] == 1.0);          // slope 1 after, starting from level 0
    CHECK(b[k + 1] - b[k] == 1.0);
}

TEST_CASE("build_regressors columns") {
    Eigen::MatrixXd X = build_regressors(4, {2});
    Eigen::MatrixXd expected(4, 3);
    expected << 1, 1, 0, 1, 2, 0, 1, 3, 1, 1, 4, 2;
    CHECK(X.isApprox(expected));

    Eigen::MatrixXd X2 = build_regressors(5, {2, 4});
    Eigen::VectorXd third(5), fourth(5);
    third << 0, 0, 1, 2, 3;
    fourth << 0, 0, 0, 0, 1;
    CHECK(X2.col(2).isApprox(third));
    CHECK(X2.col(3).isApprox(fourth));

    Eigen::MatrixXd X0 = build_regressors(100, {});
    CHECK(X0.cols() == 2);  // plain linear trend with zero breaks
}

TEST_CASE("build_regressors rejects duplicates and bad ranges") {
    CHECK_THROWS_AS(build_regressors(10, {4, 4}), std::invalid_argument);
    CHECK_THROWS_AS(build_regressors(10, {5, 3}), std::invalid_argument);
    CHECK_THROWS_AS(build_regressors(10, {1}), std::invalid_argument);  // collinear with the trend
    CHECK_THROWS_AS(build_regressors(10, {10}), std::invalid_argument);  // identically zero
}

TEST_CASE("build_regressors has full column rank on random admissible dates") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        int T = 12 + static_cast<int>(rng() % 80);
        int m = 1 + static_cast<int>(rng() % 2);
        std::vector<int> k;
        int lo = 2;
        for (int j = 0; j < m; ++j) {
            int hi = T - 2 - 3 * (m - 1 - j);
            if (lo > hi) break;
            int date = lo + static_cast<int>(rng() % (hi - lo + 1));
            k.push_back(date);
            lo = date + 3;
        }
        Eigen::MatrixXd X = build_regressors(T, k);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
        CHECK(lu.rank() == static_cast<Eigen::Index>(2 + k.size()));
    }
}

TEST_CASE("evaluate_trend matches the basis expansion") {
    EquationParams p;
    p.intercept = 0.0;
    p.slope = 0.0;
    p.slope_changes = Eigen::VectorXd::Ones(1);
    CHECK(evaluate_trend(p, {3}, 5).isApprox(slope_basis(5, 3)));

    EquationParams q;
    q.intercept = 1.0;
    q.slope = 0.1;
    q.slope_changes = Eigen::VectorXd(0);
    Eigen::VectorXd expected(3);
    expected << 1.1, 1.2, 1.3;
    CHECK(evaluate_trend(q, {}, 3).isApprox(expected, 1e-12));
}

TEST_CASE("evaluate_trend then exact least-squares refit recovers the parameters") {
    EquationParams p;
    p.intercept = 1.0;
    p.slope = 0.1;
    p.slope_changes = Eigen::VectorXd::Constant(1, 0.5);
    Eigen::VectorXd y = evaluate_trend(p, {50}, 100);

    OlsFit fit = ols_fit_single(y, {50});
    CHECK(fit.ssr < 1e-18);
    CHECK(fit.params.intercept == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.params.slope == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(fit.params.slope_changes[0] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("refit recovery on random noiseless configurations") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int T = 60;
        EquationParams p;
        p.intercept = normal(rng);
        p.slope = 0.2 * normal(rng);
        p.slope_changes = Eigen::VectorXd(2);
        p.slope_changes << 1.0 + normal(rng) * 0.2, -1.0 + normal(rng) * 0.2;
        std::vector<int> k{15 + static_cast<int>(rng() % 10), 35 + static_cast<int>(rng() % 10)};
        Eigen::VectorXd y = evaluate_trend(p, k, T);
        OlsFit fit = ols_fit_single(y, k);
        CHECK(std::abs(fit.params.intercept - p.intercept) < 1e-9);
        CHECK(std::abs(fit.params.slope - p.slope) < 1e-10);
        CHECK((fit.params.slope_changes - p.slope_changes).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("MultiSeries and BreakVector validation") {
    MultiSeries y;
    y.values = Eigen::MatrixXd::Zero(2, 4);
    CHECK_THROWS_AS(y.validate(), std::invalid_argument);  // T < 5
    y.values = Eigen::MatrixXd::Zero(2, 10);
    CHECK_NOTHROW(y.validate());
    y.values(1, 3) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(y.validate(), std::invalid_argument);

    BreakVector k;
    k.per_equation = {{5, 9}, {}};
    CHECK(k.total() == 2);
    CHECK_NOTHROW(k.validate(20, 3));
    k.per_equation = {{5, 6}, {}};
    CHECK_THROWS_AS(k.validate(20, 3), std::invalid_argument);
    k.per_equation = {{19}, {}};
    CHECK_THROWS_AS(k.validate(20), std::invalid_argument);
}

TEST_SUITE_END();
