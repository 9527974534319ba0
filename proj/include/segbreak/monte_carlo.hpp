#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "segbreak/bootstrap.hpp"
#include "segbreak/break_tests.hpp"
#include "segbreak/trend_model.hpp"

namespace segbreak {

/// Bivariate design: one slope break per equation at mid-sample, AR(1)
/// errors with cross-equation correlation, innovation scale chosen so each
/// series has unit long-run variance.
struct DgpSpec {
    int T = 100;
    double delta1 = 0.5, delta2 = 0.5;
    double alpha = 0.0;  // AR coefficient, |alpha| < 1
    double rho = 0.0;    // cross-equation correlation, |rho| < 1
    int k1 = 0, k2 = 0;  // 0 = mid-sample
    double mu1 = 0.0, mu2 = 0.0, beta1 = 0.0, beta2 = 0.0;
    int burn_in = 100;
};

MultiSeries generate_dgp(const DgpSpec& spec, std::uint64_t seed);
MultiSeries generate_dgp(const DgpSpec& spec, std::mt19937_64& rng);

/// The four null hypotheses of the size/power study on a two-equation
/// one-break-each system: both fractions pinned at 1/2; both pinned
/// off-center by 2.5%; equal fractions; fractions 5% apart.
std::array<RestrictionSet, 4> mc_hypotheses();

struct TableCell {
    double alpha = 0.0, rho = 0.0, delta = 0.0;
    std::array<double, 4> asymptotic{};
    std::array<double, 4> bootstrap{};
    bool has_bootstrap = false;
};

struct TableResult {
    TestMethod method = TestMethod::LR;
    int replications = 0;
    double level = 0.05;
    std::vector<TableCell> cells;
};

struct TableRunConfig {
    int replications = 1000;
    std::uint64_t seed = 1;
    double level = 0.05;
    bool with_bootstrap = true;
    int kilian_replications = 200;
    int threads = 0;
    SearchConfig search;
};

/// Size/power table over the (alpha, rho, delta) grid: asymptotic rates
/// reject on the chi-square critical value; bootstrap rates use one
/// bootstrap statistic per replicate and pool them for the critical value.
TableResult run_table(TestMethod method, const std::vector<double>& deltas,
                      const std::vector<double>& alphas, const std::vector<double>& rhos,
                      const TableRunConfig& cfg);

std::string to_csv(const TableResult& table);
std::string to_text(const TableResult& table);

/// One observed statistic and one null-imposed bootstrap statistic for a
/// replicate, as produced by a caller-supplied test.
struct WarpOutcome {
    double stat = 0.0;
    double boot_stat = 0.0;
};
using WarpTest = std::function<WarpOutcome(const MultiSeries& y, std::uint64_t rep_seed)>;

/// Rejection frequency per test: each replicate's statistic is compared
/// against the (1-level) quantile of that test's pooled bootstrap
/// statistics. Deterministic given the seed.
std::vector<double> warp_speed_rates(const std::function<MultiSeries(int, std::uint64_t)>& dgp,
                                     const std::vector<WarpTest>& tests, int reps, double level,
                                     std::uint64_t seed, int threads = 0);

/// (1 - level) empirical quantile used by the warp-speed rule.
double warp_quantile(std::vector<double> pooled, double level);

}  // namespace segbreak
