#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "segbreak/bootstrap.hpp"
#include "segbreak/monte_carlo.hpp"
#include "segbreak/rng.hpp"

using namespace segbreak;

TEST_SUITE_BEGIN("bootstrap");

namespace {

Eigen::MatrixXd simulate_ar1_panel(int n, int T, double rho, std::uint64_t seed) {
    std::mt19937_64 rng = make_engine(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd u(n, T);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    for (int t = -50; t < T; ++t) {
        for (int i = 0; i < n; ++i) e[i] = rho * e[i] + normal(rng);
        if (t >= 0) u.col(t) = e;
    }
    return u;
}

}  // namespace

TEST_CASE("fit_var1: white noise gives a small coefficient matrix") {
    Eigen::MatrixXd u = simulate_ar1_panel(2, 2000, 0.0, 1);
    VarModel model = fit_var1(u);
    CHECK(model.A.cwiseAbs().maxCoeff() < 0.15);
    CHECK(model.innovations.cols() == 1999);  // the lag loses one observation
}

TEST_CASE("fit_var1 recovers a known diagonal coefficient matrix") {
    Eigen::MatrixXd u = simulate_ar1_panel(2, 2000, 0.5, 2);
    VarModel model = fit_var1(u);
    CHECK(std::abs(model.A(0, 0) - 0.5) < 0.1);
    CHECK(std::abs(model.A(1, 1) - 0.5) < 0.1);
    CHECK(std::abs(model.A(0, 1)) < 0.1);
    CHECK(std::abs(model.A(1, 0)) < 0.1);
}

TEST_CASE("kilian_correct reduces the AR coefficient bias") {
    // scalar AR(1), rho = 0: the LS estimate is biased downward by about
    // (1 + 3 rho) / T; the corrected estimate should remove most of it
    const int T = 100, trials = 500;
    double bias_raw = 0.0, bias_corrected = 0.0;
    for (int s = 0; s < trials; ++s) {
        Eigen::MatrixXd u = simulate_ar1_panel(1, T, 0.0, derive_seed(42007, s));
        VarModel raw = fit_var1(u);
        auto rng = make_engine(derive_seed(42007, s), 1);
        VarModel fixed = kilian_correct(raw, u, rng, 200);
        bias_raw += raw.A(0, 0);
        bias_corrected += fixed.A(0, 0);
    }
    bias_raw /= trials;
    bias_corrected /= trials;
    CHECK(std::abs(bias_raw) > 0.004);  // the raw bias is visible (about 1/T)
    CHECK(std::abs(bias_corrected) < 0.7 * std::abs(bias_raw));
}

TEST_CASE("kilian_correct leaves a long-sample fit nearly untouched") {
    const int T = 2000;
    Eigen::MatrixXd u = simulate_ar1_panel(1, T, 0.3, 5);
    VarModel raw = fit_var1(u);
    auto rng = make_engine(99, 0);
    VarModel fixed = kilian_correct(raw, u, rng, 400);
    CHECK(std::abs(fixed.A(0, 0) - raw.A(0, 0)) < 0.01);  // bias is O(1/T)
}

TEST_CASE("kilian_correct keeps the corrected system stationary near the unit root") {
    const int T = 50;
    Eigen::MatrixXd u = simulate_ar1_panel(2, T, 0.95, 7);
    VarModel raw = fit_var1(u);
    auto rng = make_engine(3, 0);
    VarModel fixed = kilian_correct(raw, u, rng, 200);
    CHECK(spectral_radius(fixed.A) < 1.0);
}

TEST_CASE("make_null_sample with zero innovations reproduces the fitted trend") {
    DgpSpec spec;
    spec.delta1 = spec.delta2 = 1.0;
    MultiSeries y = generate_dgp(spec, 88);
    BreakVector k;
    k.per_equation = {{50}, {50}};
    SystemFit fit = fgls_fit(y, k);

    VarModel null_var;
    null_var.intercept = Eigen::VectorXd::Zero(2);
    null_var.A = Eigen::MatrixXd::Zero(2, 2);
    null_var.innovations = Eigen::MatrixXd::Zero(2, 40);

    auto rng = make_engine(1, 0);
    MultiSeries sample = make_null_sample(y, fit, k, null_var, rng);
    CHECK(sample.T() == y.T());
    CHECK(sample.n() == y.n());
    Eigen::MatrixXd trend(2, y.T());
    for (int i = 0; i < 2; ++i)
        trend.row(i) = evaluate_trend(fit.params[i], k.per_equation[i], y.T()).transpose();
    CHECK((sample.values - trend).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pseudo-error moments track the source residual moments") {
    DgpSpec spec;
    spec.alpha = 0.3;
    spec.delta1 = spec.delta2 = 1.0;
    MultiSeries y = generate_dgp(spec, 909);
    BreakVector k;
    k.per_equation = {{50}, {50}};
    SystemFit fit = fgls_fit(y, k);
    VarModel var = fit_var1(fit.residuals);

    Eigen::MatrixXd trend(2, y.T());
    for (int i = 0; i < 2; ++i)
        trend.row(i) = evaluate_trend(fit.params[i], k.per_equation[i], y.T()).transpose();

    double src_var0 = fit.residuals.row(0).squaredNorm() / y.T();
    double acc_var = 0.0;
    const int draws = 500;
    for (int d = 0; d < draws; ++d) {
        auto rng = make_engine(2024, d);
        MultiSeries sample = make_null_sample(y, fit, k, var, rng);
        Eigen::VectorXd err = (sample.values.row(0) - trend.row(0)).transpose();
        acc_var += err.squaredNorm() / y.T();
    }
    acc_var /= draws;
    CHECK(acc_var == doctest::Approx(src_var0).epsilon(0.15));
}

TEST_CASE("null-imposed residuals are orthogonal to the null regressor set") {
    DgpSpec spec;
    spec.delta1 = spec.delta2 = 0.8;
    MultiSeries y = generate_dgp(spec, 3131);
    auto res = system_break_search(y, {1, 1}, RestrictionSet::fixed_dates({0.5, 0.5}));
    SystemFit fit = fgls_fit(y, res.k);
    for (int i = 0; i < 2; ++i) {
        Eigen::MatrixXd X = build_regressors(y.T(), res.k.per_equation[i]);
        Eigen::VectorXd gram = X.transpose() * fit.residuals.row(i).transpose();
        // GLS residuals are orthogonal in the weighted metric; with the
        // iterated weights the plain cross products stay near zero as well
        CHECK(gram.cwiseAbs().maxCoeff() / y.T() < 1e-6);
    }
}

TEST_CASE("bootstrap_pvalue is one when the observed statistic is zero") {
    DgpSpec spec;
    spec.delta1 = spec.delta2 = 1.0;
    MultiSeries y = generate_dgp(spec, 515);
    BreakVector k;
    k.per_equation = {{50}, {50}};
    SystemFit fit = fgls_fit(y, k);
    BootstrapConfig cfg;
    cfg.replications = 39;
    cfg.seed = 9;
    double p = bootstrap_pvalue([](const MultiSeries&) { return 1.0; }, y, 0.0, fit, k, cfg);
    CHECK(p == 1.0);
}

TEST_CASE("bootstrap_pvalue is deterministic and worker-count independent") {
    DgpSpec spec;
    spec.alpha = 0.3;
    spec.delta1 = spec.delta2 = 0.5;
    MultiSeries y = generate_dgp(spec, 161);
    auto restriction = RestrictionSet::fixed_dates({0.5, 0.5});
    auto res = system_break_search(y, {1, 1}, restriction);
    SystemFit fit = fgls_fit(y, res.k);
    auto statistic = [&](const MultiSeries& pseudo) {
        return lr_test(pseudo, {1, 1}, restriction).statistic;
    };
    double obs = lr_test(y, {1, 1}, restriction).statistic;

    BootstrapConfig cfg;
    cfg.replications = 49;
    cfg.seed = 33;
    cfg.threads = 1;
    double p1 = bootstrap_pvalue(statistic, y, obs, fit, res.k, cfg);
    cfg.threads = 2;
    double p2 = bootstrap_pvalue(statistic, y, obs, fit, res.k, cfg);
    cfg.threads = 0;
    double p3 = bootstrap_pvalue(statistic, y, obs, fit, res.k, cfg);
    CHECK(p1 == p2);
    CHECK(p1 == p3);
}

TEST_CASE("test_with_bootstrap attaches a p-value in (0, 1]") {
    DgpSpec spec;
    spec.delta1 = spec.delta2 = 0.5;
    MultiSeries y = generate_dgp(spec, 777);
    BootstrapConfig cfg;
    cfg.replications = 49;
    cfg.seed = 5;
    TestReport rep = test_with_bootstrap(TestMethod::LR, y, {1, 1},
                                         RestrictionSet::fixed_dates({0.5, 0.5}), {}, cfg);
    REQUIRE(rep.p_bootstrap.has_value());
    CHECK(*rep.p_bootstrap > 0.0);
    CHECK(*rep.p_bootstrap <= 1.0);
}

TEST_SUITE_END();
