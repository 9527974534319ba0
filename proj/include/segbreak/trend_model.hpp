#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace segbreak {

/// Panel of n observed series over T periods. Break dates are 1-based
/// sample indices into [1, T]; calendar years are start_period + k - 1.
struct MultiSeries {
    Eigen::MatrixXd values;           // n x T
    std::vector<std::string> labels;  // n names (may be empty)
    int start_period = 1;

    int n() const { return static_cast<int>(values.rows()); }
    int T() const { return static_cast<int>(values.cols()); }

    /// Throws std::invalid_argument on empty panels, T < 5, label/row
    /// mismatch or non-finite cells.
    void validate() const;
};

/// Per-equation break dates, stored as integer sample indices. Fractions
/// k/T are derived views, never stored.
struct BreakVector {
    std::vector<std::vector<int>> per_equation;

    int equations() const { return static_cast<int>(per_equation.size()); }
    int total() const;

    /// Concatenated dates, equation-major.
    std::vector<int> flat() const;

    /// Concatenated break fractions k/T, equation-major.
    Eigen::VectorXd fractions(int T) const;

    /// Checks bounds [2, T-2], strict within-equation ordering and a
    /// minimum separation between consecutive breaks of one equation.
    void validate(int T, int min_separation = 1) const;

    bool operator==(const BreakVector& other) const { return per_equation == other.per_equation; }
};

/// Trend coefficients of one equation: level, slope and one slope change
/// per break.
struct EquationParams {
    double intercept = 0.0;
    double slope = 0.0;
    Eigen::VectorXd slope_changes;
};

/// Converged system estimate at a given break configuration.
struct SystemFit {
    std::vector<EquationParams> params;
    Eigen::MatrixXd sigma;      // n x n contemporaneous residual covariance
    Eigen::MatrixXd residuals;  // n x T
    double log_det_sigma = 0.0;
    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Basis column of a slope change at date k: element t is max(t - k, 0),
/// t = 1..T. The trend stays continuous at k; only the slope moves.
/// Throws std::invalid_argument unless 1 <= k <= T.
Eigen::VectorXd slope_basis(int T, int k);

/// Regressor matrix [constant, linear trend, slope bases] for the given
/// break dates, T x (2 + m). Dates must be strictly increasing in
/// [2, T-2]; duplicates (rank deficiency) are rejected.
Eigen::MatrixXd build_regressors(int T, const std::vector<int>& breaks);

/// Evaluates the joined segmented trend implied by params at t = 1..T.
Eigen::VectorXd evaluate_trend(const EquationParams& params, const std::vector<int>& breaks, int T);

}  // namespace segbreak
