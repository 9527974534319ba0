#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "segbreak/trend_model.hpp"

namespace segbreak {

enum class RestrictionKind { none, fixed_dates, common_groups, fixed_offsets };

/// Linear restrictions R lambda = r on the stacked break fractions,
/// together with their realization at the integer date level. Only the
/// three structured kinds are supported; a general real-valued R is not.
struct RestrictionSet {
    RestrictionKind kind = RestrictionKind::none;
    Eigen::MatrixXd R;  // q x m, entries in {0, +-1} for the supported kinds
    Eigen::VectorXd r;  // q

    /// lambda_a - lambda_b = offset, indices into the flat break vector.
    struct Link {
        int a = 0;
        int b = 0;
        double offset = 0.0;
    };
    /// lambda_a = frac.
    struct Pin {
        int a = 0;
        double frac = 0.0;
    };
    std::vector<Link> links;
    std::vector<Pin> pins;

    int q() const { return static_cast<int>(R.rows()); }
    int m() const { return static_cast<int>(R.cols()); }

    static RestrictionSet none(int m);
    /// Pins every break fraction: R = I_m, r = fracs.
    static RestrictionSet fixed_dates(const std::vector<double>& fracs);
    /// Each group is a set of flat break indices constrained to share one
    /// date; a group of size g contributes g-1 rows.
    static RestrictionSet common_groups(int m, const std::vector<std::vector<int>>& groups);
    /// Pairwise fraction differences fixed to nonzero constants.
    static RestrictionSet fixed_offsets(int m, const std::vector<Link>& offset_links);
};

struct SearchConfig {
    double trim_fraction = 0.05;
    int min_separation = 0;  // 0 = auto: max(3, ceil(0.05 T))
    int max_fgls_iter = 50;
    double fgls_tol = 1e-10;

    int effective_min_separation(int T) const;
    /// Admissible date range [lo, hi] after trimming, within [2, T-2].
    std::pair<int, int> date_bounds(int T) const;
};

/// How a system search ranks candidates. `fgls_logdet` is the
/// quasi-likelihood objective log det Sigma_hat(k) with iterated feasible
/// GLS; `ols_trace` pins the error covariance at identity, which ranks by
/// the total sum of squared residuals and decouples across equations.
enum class SearchObjective { fgls_logdet, ols_trace };

struct OlsFit {
    EquationParams params;
    double ssr = 0.0;
    Eigen::VectorXd residuals;
};

/// Least squares of one series on the segmented-trend regressors.
OlsFit ols_fit_single(const Eigen::VectorXd& y, const std::vector<int>& breaks);

/// Exhaustive per-equation grid search for m breaks minimizing the SSR.
/// Ties broken toward lexicographically earliest dates.
std::pair<std::vector<int>, double> ols_break_search(const Eigen::VectorXd& y, int m,
                                                     const SearchConfig& cfg = {});

/// Iterated feasible-GLS fit of the full system at fixed break dates,
/// starting from per-equation OLS and alternating coefficient and
/// covariance updates until log det Sigma_hat stabilizes.
SystemFit fgls_fit(const MultiSeries& y, const BreakVector& k, const SearchConfig& cfg = {});

struct SystemSearchResult {
    BreakVector k;
    SystemFit fit;
    double log_det_sigma = 0.0;  // scan-path objective at the optimum
};

/// Grid search over all admissible break vectors satisfying the
/// restriction at the date level, minimizing the search objective.
/// Ties broken toward the lexicographically earliest break vector.
SystemSearchResult system_break_search(const MultiSeries& y, const std::vector<int>& counts,
                                       const RestrictionSet& restriction,
                                       const SearchConfig& cfg = {},
                                       SearchObjective objective = SearchObjective::fgls_logdet);

}  // namespace segbreak
