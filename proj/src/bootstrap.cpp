#include "segbreak/bootstrap.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "segbreak/errors.hpp"
#include "segbreak/parallel.hpp"
#include "segbreak/rng.hpp"

namespace segbreak {

double spectral_radius(const Eigen::MatrixXd& A) {
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

VarModel fit_var1(const Eigen::MatrixXd& residuals) {
    const int n = static_cast<int>(residuals.rows());
    const int T = static_cast<int>(residuals.cols());
    if (T < n + 5) throw std::invalid_argument("fit_var1: need T >= n + 5");

    // regression of u_t on [1, u_{t-1}], t = 2..T
    Eigen::MatrixXd Z(T - 1, n + 1);
    Z.col(0).setOnes();
    Z.rightCols(n) = residuals.leftCols(T - 1).transpose();
    Eigen::MatrixXd Y = residuals.rightCols(T - 1).transpose();  // (T-1) x n
    Eigen::MatrixXd coef = (Z.transpose() * Z).ldlt().solve(Z.transpose() * Y);
    if (!coef.allFinite()) throw NumericalError("fit_var1: singular design");

    VarModel model;
    model.intercept = coef.row(0).transpose();
    model.A = coef.bottomRows(n).transpose();
    model.innovations = (Y - Z * coef).transpose();  // n x (T-1)
    return model;
}

namespace {

// Simulates T periods of the VAR, conditioning on the observed first value,
// with innovations drawn iid from the model pool.
Eigen::MatrixXd simulate_var(const VarModel& model, const Eigen::VectorXd& initial, int T,
                             std::mt19937_64& rng) {
    const int n = static_cast<int>(model.A.rows());
    const int pool = static_cast<int>(model.innovations.cols());
    std::uniform_int_distribution<int> pick(0, pool - 1);
    Eigen::MatrixXd out(n, T);
    out.col(0) = initial;
    for (int t = 1; t < T; ++t)
        out.col(t) = model.intercept + model.A * out.col(t - 1) + model.innovations.col(pick(rng));
    return out;
}

void recompute_innovations(VarModel& model, const Eigen::MatrixXd& residuals) {
    const int n = static_cast<int>(residuals.rows());
    const int T = static_cast<int>(residuals.cols());
    Eigen::MatrixXd inn(n, T - 1);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
    for (int t = 1; t < T; ++t) {
        inn.col(t - 1) = residuals.col(t) - model.A * residuals.col(t - 1);
        mean += inn.col(t - 1);
    }
    mean /= (T - 1);
    model.intercept = mean;  // keeps recomputed innovations centered
    inn.colwise() -= mean;
    model.innovations = inn;
}

}  // namespace

VarModel kilian_correct(const VarModel& model, const Eigen::MatrixXd& residuals,
                        std::mt19937_64& rng, int replications) {
    const int T = static_cast<int>(residuals.cols());
    VarModel corrected = model;
    if (spectral_radius(model.A) >= 1.0) return corrected;  // no correction outside stationarity

    Eigen::MatrixXd mean_A = Eigen::MatrixXd::Zero(model.A.rows(), model.A.cols());
    int used = 0;
    for (int b = 0; b < replications; ++b) {
        Eigen::MatrixXd pseudo = simulate_var(model, residuals.col(0), T, rng);
        try {
            mean_A += fit_var1(pseudo).A;
            ++used;
        } catch (const std::exception&) {
        }
    }
    if (used == 0) return corrected;
    Eigen::MatrixXd bias = mean_A / used - model.A;

    double shrink = 1.0;
    Eigen::MatrixXd A_new = model.A - bias;
    while (spectral_radius(A_new) >= 1.0 && shrink > 1e-6) {
        shrink *= 0.5;
        A_new = model.A - shrink * bias;
    }
    if (spectral_radius(A_new) >= 1.0) A_new = model.A;  // degenerate: keep the original

    corrected.A = A_new;
    corrected.bias_corrected = true;
    recompute_innovations(corrected, residuals);
    return corrected;
}

MultiSeries make_null_sample(const MultiSeries& y, const SystemFit& null_fit,
                             const BreakVector& k_null, const VarModel& var, std::mt19937_64& rng,
                             int burn_in) {
    const int n = y.n(), T = y.T();
    const int pool = static_cast<int>(var.innovations.cols());
    std::uniform_int_distribution<int> pick(0, pool - 1);

    // initial condition drawn from the in-sample residual columns
    std::uniform_int_distribution<int> pick_init(0, static_cast<int>(null_fit.residuals.cols()) - 1);
    Eigen::VectorXd state = null_fit.residuals.col(pick_init(rng));
    for (int t = 0; t < burn_in; ++t)
        state = var.intercept + var.A * state + var.innovations.col(pick(rng));

    MultiSeries out;
    out.labels = y.labels;
    out.start_period = y.start_period;
    out.values.resize(n, T);
    Eigen::MatrixXd trend(n, T);
    for (int i = 0; i < n; ++i)
        trend.row(i) =
            evaluate_trend(null_fit.params[i], k_null.per_equation[i], T).transpose();
    for (int t = 0; t < T; ++t) {
        out.values.col(t) = trend.col(t) + state;
        if (t + 1 < T)
            state = var.intercept + var.A * state + var.innovations.col(pick(rng));
    }
    return out;
}

double bootstrap_pvalue(const std::function<double(const MultiSeries&)>& statistic,
                        const MultiSeries& y, double stat_obs, const SystemFit& null_fit,
                        const BreakVector& k_null, const BootstrapConfig& cfg) {
    const int B = cfg.replications;
    if (B < 1) throw std::invalid_argument("bootstrap_pvalue: need at least one replication");

    VarModel var = fit_var1(null_fit.residuals);
    {
        auto rng = make_engine(cfg.seed, 0);
        var = kilian_correct(var, null_fit.residuals, rng, cfg.kilian_replications);
    }

    std::vector<double> stats(B);
    std::vector<char> failed(B, 0);
    parallel_for(
        B,
        [&](int b) {
            auto rng = make_engine(cfg.seed, static_cast<std::uint64_t>(b) + 1);
            try {
                MultiSeries pseudo = make_null_sample(y, null_fit, k_null, var, rng, cfg.burn_in);
                stats[b] = statistic(pseudo);
            } catch (const std::exception&) {
                failed[b] = 1;
            }
        },
        cfg.threads);

    int exceed = 0;
    for (int b = 0; b < B; ++b)
        if (failed[b] || stats[b] >= stat_obs) ++exceed;
    return (1.0 + exceed) / (B + 1.0);
}

TestReport test_with_bootstrap(TestMethod method, const MultiSeries& y,
                               const std::vector<int>& counts, const RestrictionSet& restriction,
                               const SearchConfig& cfg, const BootstrapConfig& boot) {
    TestReport report = run_test(method, y, counts, restriction, cfg);
    SystemFit null_fit = fgls_fit(y, report.k_restricted, cfg);
    auto statistic = [&](const MultiSeries& pseudo) {
        return run_test(method, pseudo, counts, restriction, cfg).statistic;
    };
    report.p_bootstrap =
        bootstrap_pvalue(statistic, y, report.statistic, null_fit, report.k_restricted, boot);
    return report;
}

AddBreakReport extra_break_with_bootstrap(const MultiSeries& y, const std::vector<int>& counts,
                                          const AddBreakHypothesis& hyp, const SearchConfig& cfg,
                                          const BootstrapConfig& boot) {
    int m_total = 0;
    for (int c : counts) m_total += c;
    auto base = system_break_search(y, counts, RestrictionSet::none(m_total), cfg);
    auto run_profile = [&](const MultiSeries& data, const BreakVector& k) {
        return hyp.equation ? lr_extra_break(data, k, *hyp.equation, hyp.trim, cfg)
                            : sup_lr_extra_break(data, k, hyp.trim, cfg);
    };
    AddBreakReport report = run_profile(y, base.k);

    auto statistic = [&](const MultiSeries& pseudo) {
        auto pseudo_base = system_break_search(pseudo, counts, RestrictionSet::none(m_total), cfg);
        return run_profile(pseudo, pseudo_base.k).statistic;
    };
    report.p_bootstrap =
        bootstrap_pvalue(statistic, y, report.statistic, base.fit, base.k, boot);
    return report;
}

}  // namespace segbreak
