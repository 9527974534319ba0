#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "segbreak/bootstrap.hpp"
#include "segbreak/break_tests.hpp"
#include "segbreak/trend_model.hpp"

namespace segbreak {

/// Parsed delimited table: a strictly consecutive year column plus one or
/// more named value columns.
struct SeriesTable {
    std::vector<int> years;
    std::vector<std::string> names;
    Eigen::MatrixXd columns;  // length x names.size()

    int length() const { return static_cast<int>(years.size()); }
    int find(const std::string& name) const;  // -1 when absent
    Eigen::VectorXd col(const std::string& name) const;
};

/// Loads a UTF-8 comma-delimited file with header `year,<name>[,...]`.
/// Gaps, duplicate years and non-numeric cells raise ParseError with a
/// row/column diagnostic.
SeriesTable load_series(const std::string& path);

/// Same, keeping only the named value columns; a missing name raises
/// ParseError.
SeriesTable load_series(const std::string& path, const std::vector<std::string>& columns);

/// Restricts to [year_lo, year_hi]; the range must be covered.
SeriesTable slice_years(const SeriesTable& table, int year_lo, int year_hi);

/// One named annual series on its own year grid.
struct NamedSeries {
    std::string name;
    std::vector<int> years;
    Eigen::VectorXd values;

    bool covers(int year) const;
    double at(int year) const;
};

NamedSeries extract(const SeriesTable& table, const std::string& name);

/// Chosen natural-variability regressors: at most one lag per mode,
/// selected by BIC, plus the coefficients refit on all observations.
struct FilterSpec {
    int kmax = 2;
    std::vector<std::pair<std::string, int>> chosen;  // (mode name, lag)
    Eigen::VectorXd coef;                             // constant first, then chosen regressors
    double bic = 0.0;
};

/// Exhaustive subset search over (mode, lag) candidates with lags in
/// [0, kmax-1]. The BIC sample drops the first kmax observations; the
/// returned coefficients are refit on all available observations.
FilterSpec bic_select_filter(const NamedSeries& temp, const std::vector<NamedSeries>& modes,
                             int kmax);

/// Removes the chosen mode effects: output keeps the level (residuals plus
/// fitted constant), aligned with temp's year grid.
NamedSeries filter_series(const NamedSeries& temp, const std::vector<NamedSeries>& modes,
                          const FilterSpec& spec);

/// Aligns series on a common year range (their intersection, optionally
/// narrowed to [year_lo, year_hi], which must be covered).
MultiSeries align_series(const std::vector<NamedSeries>& series, int year_lo = 0, int year_hi = 0);

struct CommonBreakOptions {
    int breaks_per_equation = 1;
    std::vector<TestMethod> methods{TestMethod::GLS_WALD, TestMethod::LR};
    bool bootstrap = true;
    BootstrapConfig boot;
    SearchConfig search;
    int year_lo = 0, year_hi = 0;
};

struct CommonBreakRow {
    std::string forcing, temp;
    std::vector<int> forcing_breaks, temp_breaks, common_breaks;  // calendar years, system estimates
    std::vector<int> forcing_breaks_eq, temp_breaks_eq;           // equation-by-equation estimates
    struct PValue {
        TestMethod method;
        double statistic = 0.0;
        double asymptotic = 1.0;
        double bootstrap = 1.0;
        bool has_bootstrap = false;
    };
    std::vector<PValue> pvalues;
};

/// Bivariate common-break analysis of one forcing series against each
/// temperature series: break dates with and without the common-break
/// restriction and p-values per requested test.
std::vector<CommonBreakRow> analyze_common_breaks(const NamedSeries& forcing,
                                                  const std::vector<NamedSeries>& temps,
                                                  const CommonBreakOptions& opts);

struct HiatusOptions {
    double trim = 0.1;
    BootstrapConfig boot;
    SearchConfig search;
    int year_lo = 0, year_hi = 0;
};

struct HiatusRow {
    std::string forcing, temp;
    double statistic = 0.0;
    double p_bootstrap = 1.0;
    int forcing_break_year = 0;
    int alt_break_year = 0;  // temperature break under the alternative
};

/// Tests no-break-in-temperature against one break, given one break in the
/// forcing series, within a bivariate system.
std::vector<HiatusRow> analyze_hiatus(const NamedSeries& forcing,
                                      const std::vector<NamedSeries>& temps,
                                      const HiatusOptions& opts);

}  // namespace segbreak
