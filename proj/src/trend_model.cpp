#include "segbreak/trend_model.hpp"

#include <cmath>
#include <stdexcept>

namespace segbreak {

void MultiSeries::validate() const {
    if (n() < 1) throw std::invalid_argument("MultiSeries: need at least one series");
    if (T() < 5) throw std::invalid_argument("MultiSeries: need at least 5 periods");
    if (!labels.empty() && static_cast<int>(labels.size()) != n())
        throw std::invalid_argument("MultiSeries: label count does not match series count");
    if (!values.allFinite()) throw std::invalid_argument("MultiSeries: non-finite observation");
}

int BreakVector::total() const {
    int m = 0;
    for (const auto& k : per_equation) m += static_cast<int>(k.size());
    return m;
}

std::vector<int> BreakVector::flat() const {
    std::vector<int> out;
    out.reserve(total());
    for (const auto& k : per_equation) out.insert(out.end(), k.begin(), k.end());
    return out;
}

Eigen::VectorXd BreakVector::fractions(int T) const {
    auto dates = flat();
    Eigen::VectorXd lam(dates.size());
    for (std::size_t j = 0; j < dates.size(); ++j) lam[j] = static_cast<double>(dates[j]) / T;
    return lam;
}

void BreakVector::validate(int T, int min_separation) const {
    for (const auto& k_i : per_equation) {
        for (std::size_t j = 0; j < k_i.size(); ++j) {
            if (k_i[j] < 2 || k_i[j] > T - 2)
                throw std::invalid_argument("BreakVector: date outside admissible range [2, T-2]");
            if (j > 0 && k_i[j] - k_i[j - 1] < std::max(1, min_separation))
                throw std::invalid_argument("BreakVector: dates not increasing or too close");
        }
    }
}

Eigen::VectorXd slope_basis(int T, int k) {
    if (k < 1 || k > T) throw std::invalid_argument("slope_basis: break date outside [1, T]");
    Eigen::VectorXd b(T);
    for (int t = 1; t <= T; ++t) b[t - 1] = t > k ? static_cast<double>(t - k) : 0.0;
    return b;
}

Eigen::MatrixXd build_regressors(int T, const std::vector<int>& breaks) {
    const int m = static_cast<int>(breaks.size());
    for (int j = 0; j < m; ++j) {
        // k = 1 duplicates the trend column and k = T is identically zero;
        // anything in between keeps the matrix full rank
        if (breaks[j] < 2 || breaks[j] > T - 1)
            throw std::invalid_argument("build_regressors: break date outside [2, T-1]");
        if (j > 0 && breaks[j] <= breaks[j - 1])
            throw std::invalid_argument("build_regressors: break dates must be strictly increasing");
    }
    Eigen::MatrixXd X(T, 2 + m);
    for (int t = 1; t <= T; ++t) {
        X(t - 1, 0) = 1.0;
        X(t - 1, 1) = static_cast<double>(t);
    }
    for (int j = 0; j < m; ++j) X.col(2 + j) = slope_basis(T, breaks[j]);
    return X;
}

Eigen::VectorXd evaluate_trend(const EquationParams& params, const std::vector<int>& breaks, int T) {
    if (params.slope_changes.size() != static_cast<Eigen::Index>(breaks.size()))
        throw std::invalid_argument("evaluate_trend: slope_changes length does not match break count");
    Eigen::VectorXd y(T);
    for (int t = 1; t <= T; ++t) y[t - 1] = params.intercept + params.slope * t;
    for (std::size_t j = 0; j < breaks.size(); ++j)
        y += params.slope_changes[static_cast<Eigen::Index>(j)] * slope_basis(T, breaks[j]);
    return y;
}

}  // namespace segbreak
