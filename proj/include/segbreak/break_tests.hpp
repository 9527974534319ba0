#pragma once

#include <optional>
#include <string>
#include <vector>

#include "segbreak/break_search.hpp"
#include "segbreak/trend_model.hpp"

namespace segbreak {

enum class TestMethod { LR, GLS_WALD, OLS_WALD };

std::string to_string(TestMethod m);

struct TestReport {
    TestMethod method = TestMethod::LR;
    double statistic = 0.0;
    int df = 0;
    double p_asymptotic = 1.0;
    std::optional<double> p_bootstrap;
    BreakVector k_restricted;
    BreakVector k_unrestricted;
    std::vector<std::string> warnings;
};

/// Upper-tail probability of a chi-square with q degrees of freedom,
/// via the regularized incomplete gamma function.
double chi_square_sf(double x, int q);

/// Quasi-likelihood ratio test of R lambda = r: T times the gap between
/// restricted and unrestricted minimized log det Sigma_hat.
TestReport lr_test(const MultiSeries& y, const std::vector<int>& counts,
                   const RestrictionSet& restriction, const SearchConfig& cfg = {});

/// Wald test built on the full-system break-date estimates with the
/// plug-in sandwich covariance.
TestReport gls_wald_test(const MultiSeries& y, const std::vector<int>& counts,
                         const RestrictionSet& restriction, const SearchConfig& cfg = {});

/// Wald test built on equation-by-equation OLS break-date estimates.
TestReport ols_wald_test(const MultiSeries& y, const std::vector<int>& counts,
                         const RestrictionSet& restriction, const SearchConfig& cfg = {});

TestReport run_test(TestMethod method, const MultiSeries& y, const std::vector<int>& counts,
                    const RestrictionSet& restriction, const SearchConfig& cfg = {});

}  // namespace segbreak
