#pragma once

// Internal: O(1) inner products between trend regressors and data, so the
// break-date grid scans never touch T-length vectors per candidate. The
// regressor vocabulary is {constant, linear trend, slope basis at k}; every
// Gram entry reduces to closed-form polynomial sums plus cached suffix sums
// of the data.

#include <Eigen/Dense>
#include <vector>

namespace segbreak::detail {

inline double sum_1_to(double s) { return s * (s + 1.0) / 2.0; }
inline double sumsq_1_to(double s) { return s * (s + 1.0) * (2.0 * s + 1.0) / 6.0; }

class CrossMomentCache {
public:
    explicit CrossMomentCache(const Eigen::MatrixXd& y)
        : T_(static_cast<int>(y.cols())), n_(static_cast<int>(y.rows())) {
        yty_ = y * y.transpose();
        cy_ = y.rowwise().sum();
        ty_.resize(n_);
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int t = 1; t <= T_; ++t) s += t * y(i, t - 1);
            ty_[i] = s;
        }
        // by_(k, i) = sum_{t >= k} (t - k) y_it via backward recursion:
        // by(k) = by(k+1) + suffix_sum(k+1).
        by_.setZero(T_ + 2, n_);
        Eigen::VectorXd suffix = Eigen::VectorXd::Zero(n_);
        for (int k = T_; k >= 1; --k) {
            by_.row(k) = by_.row(k + 1) + suffix.transpose();
            suffix += y.col(k - 1);
        }
    }

    int T() const { return T_; }
    int n() const { return n_; }

    double ctc() const { return static_cast<double>(T_); }
    double ctt() const { return sum_1_to(T_); }
    double ttt() const { return sumsq_1_to(T_); }
    double cb(int k) const { return sum_1_to(static_cast<double>(T_ - k)); }
    double tb(int k) const {
        double s = static_cast<double>(T_ - k);
        return sumsq_1_to(s) + k * sum_1_to(s);
    }
    double bb(int ka, int kb) const {
        if (ka > kb) std::swap(ka, kb);
        double s = static_cast<double>(T_ - kb);
        return sumsq_1_to(s) + (kb - ka) * sum_1_to(s);
    }

    double yty(int i, int j) const { return yty_(i, j); }
    double cy(int i) const { return cy_[i]; }
    double ty(int i) const { return ty_[i]; }
    double by(int k, int i) const { return by_(k, i); }

    /// X(ka)'X(kb) where X(k) = [c, tau, b(k_1), ...]; (2+|ka|) x (2+|kb|).
    void gram(const std::vector<int>& ka, const std::vector<int>& kb,
              Eigen::Ref<Eigen::MatrixXd> out) const {
        const int pa = 2 + static_cast<int>(ka.size());
        const int pb = 2 + static_cast<int>(kb.size());
        out(0, 0) = ctc();
        out(0, 1) = ctt();
        out(1, 0) = ctt();
        out(1, 1) = ttt();
        for (int j = 2; j < pb; ++j) {
            out(0, j) = cb(kb[j - 2]);
            out(1, j) = tb(kb[j - 2]);
        }
        for (int i = 2; i < pa; ++i) {
            out(i, 0) = cb(ka[i - 2]);
            out(i, 1) = tb(ka[i - 2]);
            for (int j = 2; j < pb; ++j) out(i, j) = bb(ka[i - 2], kb[j - 2]);
        }
    }

    /// X(ka)'y_j, length 2+|ka|.
    void xty(const std::vector<int>& ka, int j, Eigen::Ref<Eigen::VectorXd> out) const {
        out[0] = cy(j);
        out[1] = ty(j);
        for (std::size_t i = 0; i < ka.size(); ++i) out[2 + static_cast<int>(i)] = by(ka[i], j);
    }

private:
    int T_, n_;
    Eigen::MatrixXd yty_;
    Eigen::VectorXd cy_, ty_;
    Eigen::MatrixXd by_;  // (T+2) x n, rows 1..T valid
};

}  // namespace segbreak::detail
