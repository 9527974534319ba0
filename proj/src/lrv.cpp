#include "segbreak/lrv.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace segbreak {

double qs_weight(double x) {
    constexpr double pi = std::numbers::pi;
    if (x == 0.0) return 1.0;
    const double z = 6.0 * pi * x / 5.0;
    // series expansion near 0 avoids 0/0 cancellation
    if (std::abs(z) < 1e-4) {
        const double z2 = z * z;
        return 1.0 - z2 / 10.0 + z2 * z2 / 280.0;
    }
    return 25.0 / (12.0 * pi * pi * x * x) * (std::sin(z) / z - std::cos(z));
}

double andrews_bandwidth(const Eigen::MatrixXd& residuals, bool* clamped) {
    const int n = static_cast<int>(residuals.rows());
    const int T = static_cast<int>(residuals.cols());
    if (T < 10) throw std::invalid_argument("andrews_bandwidth: need T >= 10");
    if (clamped) *clamped = false;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double s00 = 0.0, s01 = 0.0;
        for (int t = 1; t < T; ++t) {
            s00 += residuals(i, t - 1) * residuals(i, t - 1);
            s01 += residuals(i, t) * residuals(i, t - 1);
        }
        double rho = s00 > 0.0 ? s01 / s00 : 0.0;
        if (std::abs(rho) > 0.97) {
            rho = rho > 0.0 ? 0.97 : -0.97;
            if (clamped) *clamped = true;
        }
        double ss = 0.0;
        for (int t = 1; t < T; ++t) {
            double e = residuals(i, t) - rho * residuals(i, t - 1);
            ss += e * e;
        }
        const double sig2 = ss / (T - 1);
        const double omr = 1.0 - rho;
        num += 4.0 * rho * rho * sig2 * sig2 / std::pow(omr, 8);
        den += sig2 * sig2 / std::pow(omr, 4);
    }
    const double alpha2 = den > 0.0 ? num / den : 0.0;
    return 1.3221 * std::pow(alpha2 * T, 0.2);
}

void floor_psd(Eigen::MatrixXd& S, double rel_floor) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    const double floor = rel_floor * std::max(S.trace(), 0.0);
    bool touched = false;
    Eigen::VectorXd ev = es.eigenvalues();
    for (int i = 0; i < ev.size(); ++i)
        if (ev[i] < floor) {
            ev[i] = floor;
            touched = true;
        }
    if (touched) S = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

HacEstimate long_run_variance(const Eigen::MatrixXd& residuals, double bandwidth) {
    const int n = static_cast<int>(residuals.rows());
    const int T = static_cast<int>(residuals.cols());
    if (T < 10) throw std::invalid_argument("long_run_variance: need T >= 10");
    HacEstimate est;
    est.bandwidth = bandwidth;
    est.sigma = residuals * residuals.transpose() / T;
    est.psi = est.sigma;
    if (bandwidth > 0.0) {
        for (int j = 1; j < T; ++j) {
            const double wj = qs_weight(j / bandwidth);
            if (wj == 0.0) continue;
            Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
            for (int t = j; t < T; ++t)
                gamma += residuals.col(t) * residuals.col(t - j).transpose();
            gamma /= T;
            est.psi += wj * (gamma + gamma.transpose());
        }
    }
    floor_psd(est.psi);
    return est;
}

HacEstimate long_run_variance(const Eigen::MatrixXd& residuals) {
    return long_run_variance(residuals, andrews_bandwidth(residuals));
}

}  // namespace segbreak
