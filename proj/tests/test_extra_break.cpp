#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "segbreak/extra_break.hpp"
#include "segbreak/monte_carlo.hpp"
#include "segbreak/rng.hpp"

using namespace segbreak;

TEST_SUITE_BEGIN("extra_break");

namespace {

// equation 0 carries a base break at T/2, equation 1 carries the extra
// break to detect at T/4 with the given magnitude
MultiSeries two_equation_fixture(int T, double extra_magnitude, double noise_sd,
                                 std::uint64_t seed) {
    std::mt19937_64 rng = make_engine(seed);
    std::normal_distribution<double> normal(0.0, noise_sd);
    EquationParams p1;
    p1.intercept = 0.0;
    p1.slope = 0.01;
    p1.slope_changes = Eigen::VectorXd::Constant(1, 1.0);
    EquationParams p2;
    p2.intercept = 0.5;
    p2.slope = -0.01;
    p2.slope_changes = Eigen::VectorXd::Constant(1, extra_magnitude);

    MultiSeries y;
    y.values.resize(2, T);
    y.values.row(0) = evaluate_trend(p1, {T / 2}, T).transpose();
    y.values.row(1) = evaluate_trend(p2, {T / 4}, T).transpose();
    for (int t = 0; t < T; ++t) {
        y.values(0, t) += normal(rng);
        y.values(1, t) += normal(rng);
    }
    return y;
}

}  // namespace

TEST_CASE("admissible_grid: two-sided exclusion around an existing break") {
    BreakVector k;
    k.per_equation = {{50}};
    auto grid = admissible_grid(k, 0, 0.1, 100);
    CHECK(grid.front() == 10);
    CHECK(grid.back() == 90);
    for (int h : grid) {
        CHECK(std::abs(h - 50) >= 10);
        CHECK(h >= 10);
        CHECK(h <= 90);
    }
    // {10..40} and {60..90}
    CHECK(grid.size() == 31 + 31);
}

TEST_CASE("admissible_grid with no existing breaks") {
    BreakVector k;
    k.per_equation = {{}};
    auto grid = admissible_grid(k, 0, 0.15, 100);
    CHECK(grid.front() == 15);
    CHECK(grid.back() == 85);
    CHECK(grid.size() == 71);
}

TEST_CASE("admissible_grid rejects an infeasible trim") {
    BreakVector k;
    k.per_equation = {{50}};
    CHECK_THROWS_AS(admissible_grid(k, 0, 0.45, 100), std::invalid_argument);
}

TEST_CASE("statistic is nonnegative: the augmented model nests the null") {
    for (int r = 0; r < 5; ++r) {
        MultiSeries y = two_equation_fixture(100, 0.0, 1.0, derive_seed(808, r));
        BreakVector k;
        k.per_equation = {{50}, {}};
        AddBreakReport rep = lr_extra_break(y, k, 1, 0.1);
        CHECK(rep.statistic >= 0.0);
        for (const auto& [h, lr] : rep.profile) {
            CHECK(lr >= 0.0);
            CHECK(std::abs(h - 50) >= 0);  // grid membership checked below
        }
    }
}

TEST_CASE("grid restriction respected: nu_hat avoids edges and existing breaks") {
    MultiSeries y = two_equation_fixture(100, 1.0, 0.5, 4242);
    BreakVector k;
    k.per_equation = {{50}, {}};
    AddBreakReport rep = lr_extra_break(y, k, 0, 0.1);  // profile the equation with a break
    CHECK(std::abs(rep.nu_hat - 50) >= 10);
    CHECK(rep.nu_hat >= 10);
    CHECK(rep.nu_hat <= 90);
}

TEST_CASE("a genuine second break is located within +-3 in 95% of replicates") {
    const int reps = 200;
    int hits = 0;
    for (int r = 0; r < reps; ++r) {
        MultiSeries y = two_equation_fixture(100, 1.0, 0.1, derive_seed(99, r));
        BreakVector k;
        k.per_equation = {{50}, {}};  // the null configuration
        AddBreakReport rep = lr_extra_break(y, k, 1, 0.1);
        if (std::abs(rep.nu_hat - 25) <= 3) ++hits;
    }
    CHECK(hits >= 190);
}

TEST_CASE("sup over a single equation equals the per-equation profile") {
    MultiSeries y = two_equation_fixture(100, 0.8, 0.3, 11);
    MultiSeries single;
    single.values = y.values.row(1);
    BreakVector k;
    k.per_equation = {{}};
    AddBreakReport a = lr_extra_break(single, k, 0, 0.1);
    AddBreakReport b = sup_lr_extra_break(single, k, 0.1);
    CHECK(a.statistic == b.statistic);
    CHECK(a.nu_hat == b.nu_hat);
    CHECK(b.equation_hat == 0);
}

TEST_CASE("sup picks the equation carrying the extra break") {
    const int reps = 100;
    int correct = 0;
    for (int r = 0; r < reps; ++r) {
        MultiSeries y = two_equation_fixture(100, 1.0, 0.1, derive_seed(314, r));
        BreakVector k;
        k.per_equation = {{50}, {}};
        AddBreakReport rep = sup_lr_extra_break(y, k, 0.1);
        if (rep.equation_hat == 1) ++correct;
    }
    CHECK(correct >= 90);
}

TEST_CASE("duplicated equations tie to the lowest index with identical profiles") {
    std::mt19937_64 rng(5150);
    std::normal_distribution<double> normal;
    const int T = 80;
    Eigen::VectorXd base(T);
    for (int t = 0; t < T; ++t) base[t] = 0.02 * t + normal(rng);
    MultiSeries y;
    y.values.resize(2, T);
    y.values.row(0) = base.transpose();
    y.values.row(1) = base.transpose();
    BreakVector k;
    k.per_equation = {{}, {}};
    AddBreakReport sup = sup_lr_extra_break(y, k, 0.15);
    AddBreakReport eq0 = lr_extra_break(y, k, 0, 0.15);
    AddBreakReport eq1 = lr_extra_break(y, k, 1, 0.15);
    for (std::size_t i = 0; i < eq0.profile.size(); ++i) {
        CHECK(eq0.profile[i].first == eq1.profile[i].first);
        double scale = std::max(1.0, std::abs(eq1.profile[i].second));
        CHECK(std::abs(eq0.profile[i].second - eq1.profile[i].second) / scale < 1e-6);
    }
    CHECK(sup.equation_hat == 0);
}

TEST_CASE("profile is invariant to affine trend shifts") {
    MultiSeries y = two_equation_fixture(100, 0.7, 0.4, 606);
    BreakVector k;
    k.per_equation = {{50}, {}};
    AddBreakReport base = lr_extra_break(y, k, 1, 0.1);

    MultiSeries shifted = y;
    for (int t = 1; t <= y.T(); ++t) {
        shifted.values(0, t - 1) += 3.0 + 0.5 * t;
        shifted.values(1, t - 1) += -1.0 - 0.25 * t;
    }
    AddBreakReport moved = lr_extra_break(shifted, k, 1, 0.1);
    REQUIRE(base.profile.size() == moved.profile.size());
    for (std::size_t i = 0; i < base.profile.size(); ++i) {
        CHECK(base.profile[i].first == moved.profile[i].first);
        double scale = std::max(1.0, std::abs(base.profile[i].second));
        CHECK(std::abs(base.profile[i].second - moved.profile[i].second) / scale < 1e-6);
    }
    CHECK(base.nu_hat == moved.nu_hat);
}

TEST_SUITE_END();
