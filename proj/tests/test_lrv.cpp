#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "segbreak/lrv.hpp"

using namespace segbreak;

TEST_SUITE_BEGIN("lrv");

TEST_CASE("qs_weight at the origin and near it") {
    CHECK(qs_weight(0.0) == 1.0);
    CHECK(std::abs(qs_weight(1e-8) - 1.0) < 1e-6);
}

TEST_CASE("qs_weight against high-precision reference values") {
    // frozen from a 40-digit evaluation of the closed form
    CHECK(qs_weight(0.5) == doctest::Approx(0.6869307300640594466).epsilon(1e-12));
    CHECK(qs_weight(1.0) == doctest::Approx(0.1378605816745935487).epsilon(1e-12));
    CHECK(qs_weight(1.5) == doctest::Approx(-0.0856501971841268988).epsilon(1e-12));
    CHECK(qs_weight(2.0) == doctest::Approx(-0.0096508008555533069).epsilon(1e-12));
}

TEST_CASE("andrews_bandwidth is zero for exactly uncorrelated residuals") {
    // (1, 0, -1, 0, ...) has every lag-1 product equal to zero
    const int T = 41;
    Eigen::MatrixXd u(1, T);
    for (int t = 0; t < T; ++t) u(0, t) = (t % 2 == 0) ? ((t / 2) % 2 == 0 ? 1.0 : -1.0) : 0.0;
    CHECK(andrews_bandwidth(u) == 0.0);
}

TEST_CASE("andrews_bandwidth matches an independent scalar computation") {
    std::mt19937_64 rng(2718);
    std::normal_distribution<double> normal;
    const int T = 100;
    Eigen::MatrixXd u(1, T);
    double prev = 0.0;
    for (int t = 0; t < T; ++t) {
        prev = 0.5 * prev + normal(rng);
        u(0, t) = prev;
    }

    // scalar oracle written out long-hand
    double s00 = 0, s01 = 0;
    for (int t = 1; t < T; ++t) {
        s00 += u(0, t - 1) * u(0, t - 1);
        s01 += u(0, t) * u(0, t - 1);
    }
    double rho = s01 / s00;
    double ss = 0;
    for (int t = 1; t < T; ++t) {
        double e = u(0, t) - rho * u(0, t - 1);
        ss += e * e;
    }
    double sig2 = ss / (T - 1);
    double alpha2 = (4.0 * rho * rho * sig2 * sig2 / std::pow(1.0 - rho, 8)) /
                    (sig2 * sig2 / std::pow(1.0 - rho, 4));
    double expected = 1.3221 * std::pow(alpha2 * T, 0.2);

    CHECK(andrews_bandwidth(u) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("andrews_bandwidth is invariant to rescaling the residuals") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd u(2, 120);
    for (int t = 0; t < 120; ++t) {
        u(0, t) = normal(rng);
        u(1, t) = normal(rng) + 0.4 * u(0, t);
    }
    double b1 = andrews_bandwidth(u);
    double b2 = andrews_bandwidth(10.0 * u);
    CHECK(b1 == doctest::Approx(b2).epsilon(1e-10));
}

TEST_CASE("long_run_variance on iid residuals approaches the identity") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd u(2, 2000);
    for (int t = 0; t < 2000; ++t) {
        u(0, t) = normal(rng);
        u(1, t) = normal(rng);
    }
    HacEstimate est = long_run_variance(u);
    CHECK((est.psi - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.15);
}

TEST_CASE("long_run_variance of the unit-long-run AR(1) construction is near one") {
    // e_t = 0.5 e_{t-1} + eps, sd(eps) = 0.5: long-run variance is 1 exactly
    std::mt19937_64 rng(12);
    std::normal_distribution<double> normal(0.0, 0.5);
    const int T = 2000;
    Eigen::MatrixXd u(1, T);
    double e = 0.0;
    for (int t = -100; t < T; ++t) {
        e = 0.5 * e + normal(rng);
        if (t >= 0) u(0, t) = e;
    }
    HacEstimate est = long_run_variance(u);
    CHECK(est.psi(0, 0) == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("forced zero bandwidth collapses psi to sigma") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd u(2, 50);
    for (int t = 0; t < 50; ++t) {
        u(0, t) = normal(rng);
        u(1, t) = 0.7 * u(0, t) + normal(rng);
    }
    HacEstimate est = long_run_variance(u, 0.0);
    CHECK(est.psi.isApprox(est.sigma));
    CHECK(est.sigma.isApprox(u * u.transpose() / 50.0, 1e-12));
}

TEST_CASE("white-noise psi converges to sigma as T grows") {
    for (auto [T, tol] : {std::pair<int, double>{500, 0.4}, {2000, 0.2}}) {
        std::mt19937_64 rng(1000 + T);
        std::normal_distribution<double> normal;
        Eigen::MatrixXd u(2, T);
        for (int t = 0; t < T; ++t) {
            u(0, t) = normal(rng);
            u(1, t) = normal(rng);
        }
        HacEstimate est = long_run_variance(u);
        CHECK((est.psi - est.sigma).cwiseAbs().maxCoeff() < tol);
    }
}

TEST_CASE("congruence equivariance at fixed bandwidth: A u maps psi to A psi A'") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal;
    const int T = 300;
    Eigen::MatrixXd u(2, T);
    double e0 = 0, e1 = 0;
    for (int t = 0; t < T; ++t) {
        e0 = 0.4 * e0 + normal(rng);
        e1 = -0.2 * e1 + normal(rng);
        u(0, t) = e0;
        u(1, t) = e1;
    }
    Eigen::MatrixXd A(2, 2);
    A << 1.3, -0.4, 0.8, 2.1;
    const double bw = 4.0;
    HacEstimate base = long_run_variance(u, bw);
    HacEstimate mapped = long_run_variance(A * u, bw);
    CHECK((mapped.psi - A * base.psi * A.transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("psi stays symmetric and positive semidefinite") {
    std::mt19937_64 rng(64);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd u(3, 200);
    for (int t = 0; t < 200; ++t)
        for (int i = 0; i < 3; ++i) u(i, t) = normal(rng);
    HacEstimate est = long_run_variance(u);
    CHECK((est.psi - est.psi.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est.psi);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * est.psi.trace());
}

TEST_SUITE_END();
