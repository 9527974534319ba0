#pragma once

#include <Eigen/Dense>

namespace segbreak {

/// Short-run and long-run covariance estimates of an error process.
struct HacEstimate {
    Eigen::MatrixXd sigma;  // contemporaneous covariance, U U'/T
    Eigen::MatrixXd psi;    // kernel-weighted long-run covariance
    double bandwidth = 0.0;
};

/// Quadratic spectral kernel weight; 1 at the origin.
double qs_weight(double x);

/// Andrews data-dependent bandwidth from per-series AR(1) approximations
/// with unit weights. AR coefficients are clamped to |rho| <= 0.97;
/// `clamped`, when given, reports whether any series hit the clamp.
double andrews_bandwidth(const Eigen::MatrixXd& residuals, bool* clamped = nullptr);

/// Floors eigenvalues below rel_floor * trace (in place); keeps downstream
/// sandwich inverses well defined.
void floor_psd(Eigen::MatrixXd& S, double rel_floor = 1e-10);

/// Quadratic-spectral HAC estimate with the Andrews AR(1) bandwidth.
/// Residuals enter as produced by the fit (no extra demeaning).
HacEstimate long_run_variance(const Eigen::MatrixXd& residuals);

/// Same with a caller-forced bandwidth; bandwidth <= 0 yields psi == sigma.
HacEstimate long_run_variance(const Eigen::MatrixXd& residuals, double bandwidth);

}  // namespace segbreak
