#pragma once

// Internal: feasible-GLS objective evaluation for candidate break vectors,
// built on the cross-moment cache. One evaluator per data panel; a
// workspace holds the iteration buffers so grid scans do not allocate.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "cross_moments.hpp"

namespace segbreak::detail {

/// Eigenvalue summary of a candidate residual covariance. `logdet` uses the
/// raw spectrum (clamped away from zero so perfect fits stay ordered and
/// finite); `inv` uses a floored spectrum so the next GLS step stays
/// defined; `degenerate` marks spectra too close to singular to keep
/// iterating on.
struct CovInfo {
    double logdet = 0.0;
    Eigen::MatrixXd inv;
    bool degenerate = false;
};

inline CovInfo analyze_cov(const Eigen::MatrixXd& S) {
    CovInfo info;
    const int n = static_cast<int>(S.rows());
    const double trace = S.trace();
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() == Eigen::Success) {
        double mindiag = llt.matrixL()(0, 0);
        double ld = 0.0;
        for (int i = 0; i < n; ++i) {
            double d = llt.matrixL()(i, i);
            mindiag = std::min(mindiag, d);
            ld += 2.0 * std::log(d);
        }
        if (mindiag * mindiag > 1e-12 * std::max(trace, 1e-300)) {
            info.logdet = ld;
            info.inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
            return info;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double floor = std::max(1e-12 * std::max(trace, 0.0), 1e-300);
    double ld = 0.0;
    Eigen::VectorXd inv_ev(n);
    for (int i = 0; i < n; ++i) {
        double ev = es.eigenvalues()[i];
        ld += std::log(std::max(ev, 1e-300));
        inv_ev[i] = 1.0 / std::max(ev, floor);
    }
    info.logdet = ld;
    info.inv = es.eigenvectors() * inv_ev.asDiagonal() * es.eigenvectors().transpose();
    info.degenerate = true;
    return info;
}

class SystemEvaluator {
public:
    explicit SystemEvaluator(const Eigen::MatrixXd& y) : cache_(y), n_(cache_.n()) {}

    const CrossMomentCache& cache() const { return cache_; }
    int n() const { return n_; }
    int T() const { return cache_.T(); }

    struct Workspace {
        Eigen::MatrixXd A, S, Sinv;
        Eigen::VectorXd rhs, theta;
        std::vector<Eigen::MatrixXd> M;  // n*n Gram blocks, row-major (i,j)
        std::vector<Eigen::VectorXd> v;  // n*n vectors X_i'y_j
        Eigen::LDLT<Eigen::MatrixXd> ldlt;
    };

    Workspace make_workspace(int max_breaks_per_eq) const {
        Workspace w;
        const int pmax = 2 + max_breaks_per_eq;
        w.A.resize(n_ * pmax, n_ * pmax);
        w.S.resize(n_, n_);
        w.Sinv.resize(n_, n_);
        w.rhs.resize(n_ * pmax);
        w.theta.resize(n_ * pmax);
        w.M.assign(n_ * n_, Eigen::MatrixXd(pmax, pmax));
        w.v.assign(n_ * n_, Eigen::VectorXd(pmax));
        w.ldlt = Eigen::LDLT<Eigen::MatrixXd>(n_ * pmax);
        return w;
    }

    /// log det Sigma_hat(k) after iterated FGLS. `dates` lists per-equation
    /// regressor break dates (distinct within an equation, order free).
    double fgls_logdet(const std::vector<std::vector<int>>& dates, int max_iter, double tol,
                       Workspace& w) const {
        return run_fgls(dates, max_iter, tol, w, nullptr, nullptr, nullptr);
    }

    /// Same iteration, also reporting coefficients and covariance.
    double fgls_solve(const std::vector<std::vector<int>>& dates, int max_iter, double tol,
                      Workspace& w, Eigen::VectorXd* theta_out, Eigen::MatrixXd* sigma_out,
                      int* iter_out) const {
        return run_fgls(dates, max_iter, tol, w, theta_out, sigma_out, iter_out);
    }

    /// Total SSR across equations under identity error covariance
    /// (equation-by-equation OLS).
    double ols_trace(const std::vector<std::vector<int>>& dates, Workspace& w) const {
        double total = 0.0;
        for (int i = 0; i < n_; ++i) {
            const int p = 2 + static_cast<int>(dates[i].size());
            auto M = w.M[0].topLeftCorner(p, p);
            auto v = w.v[0].head(p);
            cache_.gram(dates[i], dates[i], M);
            cache_.xty(dates[i], i, v);
            w.ldlt.compute(M);
            total += cache_.yty(i, i) - v.dot(w.ldlt.solve(v));
        }
        return total;
    }

private:
    double run_fgls(const std::vector<std::vector<int>>& dates, int max_iter, double tol,
                    Workspace& w, Eigen::VectorXd* theta_out, Eigen::MatrixXd* sigma_out,
                    int* iter_out) const {
        const int T = cache_.T();
        std::vector<int> p(n_), off(n_);
        int P = 0;
        for (int i = 0; i < n_; ++i) {
            p[i] = 2 + static_cast<int>(dates[i].size());
            off[i] = P;
            P += p[i];
        }
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j) {
                cache_.gram(dates[i], dates[j], w.M[i * n_ + j].topLeftCorner(p[i], p[j]));
                if (j > i)
                    w.M[j * n_ + i].topLeftCorner(p[j], p[i]) =
                        w.M[i * n_ + j].topLeftCorner(p[i], p[j]).transpose();
            }
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) cache_.xty(dates[i], j, w.v[i * n_ + j].head(p[i]));

        w.Sinv.setIdentity(n_, n_);
        double prev = std::numeric_limits<double>::quiet_NaN();
        double logdet = 0.0;
        int it = 0;
        for (; it < std::max(max_iter, 1); ++it) {
            auto A = w.A.topLeftCorner(P, P);
            auto rhs = w.rhs.head(P);
            for (int i = 0; i < n_; ++i) {
                rhs.segment(off[i], p[i]).setZero();
                for (int j = 0; j < n_; ++j) {
                    A.block(off[i], off[j], p[i], p[j]) =
                        w.Sinv(i, j) * w.M[i * n_ + j].topLeftCorner(p[i], p[j]);
                    rhs.segment(off[i], p[i]) += w.Sinv(i, j) * w.v[i * n_ + j].head(p[i]);
                }
            }
            w.ldlt.compute(A);
            w.theta.head(P) = w.ldlt.solve(rhs);
            for (int i = 0; i < n_; ++i) {
                auto ti = w.theta.segment(off[i], p[i]);
                for (int j = i; j < n_; ++j) {
                    auto tj = w.theta.segment(off[j], p[j]);
                    double s = cache_.yty(i, j) - ti.dot(w.v[i * n_ + j].head(p[i])) -
                               tj.dot(w.v[j * n_ + i].head(p[j])) +
                               ti.dot(w.M[i * n_ + j].topLeftCorner(p[i], p[j]) * tj);
                    w.S(i, j) = s / T;
                    w.S(j, i) = w.S(i, j);
                }
            }
            CovInfo info = analyze_cov(w.S);
            logdet = info.logdet;
            if (info.degenerate || (it > 0 && std::abs(info.logdet - prev) < tol)) {
                ++it;
                break;
            }
            prev = info.logdet;
            w.Sinv = info.inv;
        }
        if (theta_out) *theta_out = w.theta.head(P);
        if (sigma_out) *sigma_out = w.S;
        if (iter_out) *iter_out = it;
        return logdet;
    }

    CrossMomentCache cache_;
    int n_;
};

}  // namespace segbreak::detail
