#pragma once

#include <Eigen/Dense>
#include <vector>

namespace segbreak {

/// Closed-form integrals over [0,1] of products of the limit regressor
/// functions: the positive part (r - a)+, the level indicator 1(r > a),
/// and polynomials in r. Arguments may be 0 (which recovers the plain
/// polynomial moments); all are exact piecewise polynomials.
namespace moments {

/// ∫ (r-a)+ dr = (1-a)^2 / 2
double pos(double a);
/// ∫ (r-a)+ (r-b)+ dr
double pos_pos(double a, double b);
/// ∫ r 1(r>a) dr = (1-a^2)/2
double r_ind(double a);
/// ∫ 1(r>a) 1(r>b) dr = 1 - max(a,b)
double ind_ind(double a, double b);
/// ∫ (r-a)+ 1(r>b) dr
double pos_ind(double a, double b);
/// ∫ ((r-a)+)^2 dr = (1-a)^3 / 3
double pos_sq(double a);

}  // namespace moments

/// Pairwise moment blocks of the limit regressors f_i (trend part, size
/// 2+m_i) and g_i (level indicators, size m_i) for every equation pair.
struct MomentBlocks {
    std::vector<int> m;                        // breaks per equation
    std::vector<std::vector<Eigen::MatrixXd>> FF;  // (2+m_i) x (2+m_j)
    std::vector<std::vector<Eigen::MatrixXd>> FG;  // (2+m_i) x m_j
    std::vector<std::vector<Eigen::MatrixXd>> GF;  // m_i x (2+m_j)
    std::vector<std::vector<Eigen::MatrixXd>> GG;  // m_i x m_j
};

MomentBlocks moment_blocks(const std::vector<std::vector<double>>& lambda);

/// System-level limit covariance of the break-fraction estimates.
struct LimitCov {
    Eigen::MatrixXd xi0;      // outer (long-run) score covariance
    Eigen::MatrixXd xi1;      // curvature
    Eigen::MatrixXd xi;       // xi1^-1 xi0 xi1^-1
    Eigen::VectorXd d_delta;  // stacked slope changes
};

LimitCov assemble_limit_cov(const std::vector<std::vector<double>>& lambda,
                            const std::vector<std::vector<double>>& delta,
                            const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& psi);

/// Equation-by-equation limit covariance (break dates estimated per
/// equation by OLS).
struct EquationLimitCov {
    Eigen::MatrixXd xi_s;  // m x m
    std::vector<std::vector<Eigen::MatrixXd>> P;
};

EquationLimitCov assemble_eq_limit_cov(const std::vector<std::vector<double>>& lambda,
                                       const std::vector<std::vector<double>>& delta,
                                       const Eigen::MatrixXd& psi);

/// Evaluators for the additional-break limit process in equation `eq`:
/// the local information xi1(nu), its long-run counterpart xi0(nu), the
/// cross terms with the estimated break fractions, and the variance of
/// the limit process. All are functions of the candidate fraction nu.
class AddBreakKernels {
public:
    AddBreakKernels(const std::vector<std::vector<double>>& lambda,
                    const std::vector<std::vector<double>>& delta, const Eigen::MatrixXd& sigma,
                    const Eigen::MatrixXd& psi, int eq);

    double xi0(double nu) const;
    double xi1(double nu) const;
    Eigen::VectorXd varsigma0(double nu) const;
    Eigen::VectorXd varsigma1(double nu) const;

    /// Variance of the limit process. With `fractions_known` the break
    /// fractions are treated as given rather than estimated, which drops
    /// the cross-term corrections (and collapses to xi1 when sigma equals
    /// psi).
    double var_eta(double nu, bool fractions_known = false) const;

private:
    Eigen::VectorXd fb(double nu) const;  // stacked ∫ f_j b dr weighted later
    std::vector<std::vector<double>> lambda_;
    int eq_;
    Eigen::MatrixXd s_, kappa_;           // Sigma^-1 and Sigma^-1 Psi Sigma^-1
    Eigen::MatrixXd qff_inv_;
    Eigen::MatrixXd gamma_ff_, q_gf_, gamma_gf_;
    Eigen::MatrixXd xi0_sys_, xi1_sys_inv_;
    Eigen::VectorXd d_delta_;
    std::vector<int> f_offsets_;
    int psum_ = 0, m_ = 0;
};

AddBreakKernels addbreak_kernels(const std::vector<std::vector<double>>& lambda,
                                 const std::vector<std::vector<double>>& delta,
                                 const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& psi, int eq);

}  // namespace segbreak
