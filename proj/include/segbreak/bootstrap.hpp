#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>

#include "segbreak/break_search.hpp"
#include "segbreak/break_tests.hpp"
#include "segbreak/extra_break.hpp"
#include "segbreak/trend_model.hpp"

namespace segbreak {

/// First-order VAR fitted to detrended residuals; the innovation pool
/// drives the resampling scheme.
struct VarModel {
    Eigen::VectorXd intercept;   // n
    Eigen::MatrixXd A;           // n x n
    Eigen::MatrixXd innovations; // n x (T-1), centered when resampled
    bool bias_corrected = false;
};

struct BootstrapConfig {
    int replications = 199;
    std::uint64_t seed = 1;
    int kilian_replications = 200;
    int burn_in = 50;
    int threads = 0;  // 0 = library default
};

/// Least-squares VAR(1) with intercept on an n x T residual panel.
VarModel fit_var1(const Eigen::MatrixXd& residuals);

/// Bootstrap bias correction of the VAR coefficients. If the corrected
/// matrix leaves the stationary region the correction is halved until the
/// spectral radius drops below one. Innovations are recomputed under the
/// corrected coefficients.
VarModel kilian_correct(const VarModel& model, const Eigen::MatrixXd& residuals,
                        std::mt19937_64& rng, int replications = 200);

double spectral_radius(const Eigen::MatrixXd& A);

/// Pseudo-sample under the null: iid-resampled VAR innovations are run
/// through the (corrected) recursion, burn-in discarded, and the errors
/// added to the null-restricted fitted trends.
MultiSeries make_null_sample(const MultiSeries& y, const SystemFit& null_fit,
                             const BreakVector& k_null, const VarModel& var, std::mt19937_64& rng,
                             int burn_in = 50);

/// Bootstrap p-value (1 + #{stat_b >= stat_obs}) / (B + 1) for an
/// arbitrary statistic. Each replicate draws a fresh null sample and
/// re-runs the statistic; failures count as exceedances. Deterministic
/// given the seed, independent of the worker count.
double bootstrap_pvalue(const std::function<double(const MultiSeries&)>& statistic,
                        const MultiSeries& y, double stat_obs, const SystemFit& null_fit,
                        const BreakVector& k_null, const BootstrapConfig& cfg);

/// Runs the test and attaches a bootstrap p-value, imposing the null via
/// the restricted break-date estimates.
TestReport test_with_bootstrap(TestMethod method, const MultiSeries& y,
                               const std::vector<int>& counts, const RestrictionSet& restriction,
                               const SearchConfig& cfg, const BootstrapConfig& boot);

/// Additional-break test with a bootstrap p-value; the null sample carries
/// the base-break trend only and each replicate re-runs the full pipeline
/// (base-break re-estimation plus profile).
AddBreakReport extra_break_with_bootstrap(const MultiSeries& y, const std::vector<int>& counts,
                                          const AddBreakHypothesis& hyp, const SearchConfig& cfg,
                                          const BootstrapConfig& boot);

}  // namespace segbreak
