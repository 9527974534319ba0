#include "segbreak/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "segbreak/errors.hpp"
#include "segbreak/lrv.hpp"
#include "segbreak/limit_dist.hpp"
#include "segbreak/parallel.hpp"
#include "segbreak/rng.hpp"

namespace segbreak {

MultiSeries generate_dgp(const DgpSpec& spec, std::mt19937_64& rng) {
    if (!(std::abs(spec.alpha) < 1.0 && std::abs(spec.rho) < 1.0))
        throw std::invalid_argument("generate_dgp: need |alpha| < 1 and |rho| < 1");
    const int T = spec.T;
    const int k1 = spec.k1 > 0 ? spec.k1 : T / 2;
    const int k2 = spec.k2 > 0 ? spec.k2 : T / 2;
    const double sd = 1.0 - spec.alpha;  // unit long-run variance by construction
    std::normal_distribution<double> normal(0.0, sd);

    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    Eigen::MatrixXd u(2, T);
    const double l21 = spec.rho, l22 = std::sqrt(1.0 - spec.rho * spec.rho);
    for (int t = -spec.burn_in; t < T; ++t) {
        e[0] = spec.alpha * e[0] + normal(rng);
        e[1] = spec.alpha * e[1] + normal(rng);
        if (t >= 0) {
            u(0, t) = e[0];
            u(1, t) = l21 * e[0] + l22 * e[1];
        }
    }

    MultiSeries y;
    y.labels = {"y1", "y2"};
    y.values.resize(2, T);
    for (int t = 1; t <= T; ++t) {
        double b1 = t > k1 ? static_cast<double>(t - k1) : 0.0;
        double b2 = t > k2 ? static_cast<double>(t - k2) : 0.0;
        y.values(0, t - 1) = spec.mu1 + spec.beta1 * t + spec.delta1 * b1 + u(0, t - 1);
        y.values(1, t - 1) = spec.mu2 + spec.beta2 * t + spec.delta2 * b2 + u(1, t - 1);
    }
    return y;
}

MultiSeries generate_dgp(const DgpSpec& spec, std::uint64_t seed) {
    auto rng = make_engine(seed, 0);
    return generate_dgp(spec, rng);
}

std::array<RestrictionSet, 4> mc_hypotheses() {
    return {RestrictionSet::fixed_dates({0.5, 0.5}),
            RestrictionSet::fixed_dates({0.525, 0.475}),
            RestrictionSet::common_groups(2, {{0, 1}}),
            RestrictionSet::fixed_offsets(2, {{0, 1, 0.05}})};
}

double warp_quantile(std::vector<double> pooled, double level) {
    if (pooled.empty()) throw std::invalid_argument("warp_quantile: empty pool");
    std::sort(pooled.begin(), pooled.end());
    const auto R = static_cast<double>(pooled.size());
    auto idx = static_cast<std::size_t>(std::ceil((1.0 - level) * R));
    idx = std::min(std::max<std::size_t>(idx, 1), pooled.size());
    return pooled[idx - 1];
}

std::vector<double> warp_speed_rates(const std::function<MultiSeries(int, std::uint64_t)>& dgp,
                                     const std::vector<WarpTest>& tests, int reps, double level,
                                     std::uint64_t seed, int threads) {
    const int nt = static_cast<int>(tests.size());
    std::vector<std::vector<double>> stats(nt, std::vector<double>(reps));
    std::vector<std::vector<double>> boots(nt, std::vector<double>(reps));
    parallel_for(
        reps,
        [&](int r) {
            const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
            MultiSeries y = dgp(r, rep_seed);
            for (int t = 0; t < nt; ++t) {
                WarpOutcome out = tests[t](y, derive_seed(rep_seed, static_cast<std::uint64_t>(t)));
                stats[t][r] = out.stat;
                boots[t][r] = out.boot_stat;
            }
        },
        threads);
    std::vector<double> rates(nt);
    for (int t = 0; t < nt; ++t) {
        double cv = warp_quantile(boots[t], level);
        int rej = 0;
        for (int r = 0; r < reps; ++r)
            if (stats[t][r] > cv) ++rej;
        rates[t] = static_cast<double>(rej) / reps;
    }
    return rates;
}

namespace {

struct RepOutcome {
    std::array<double, 4> stat{};
    std::array<double, 4> p_asym{};
    std::array<double, 4> boot_stat{};
};

// All four hypotheses on one sample, sharing the unrestricted estimation
// and, for the Wald tests, the plug-in covariance.
struct SharedEval {
    TestMethod method;
    SearchConfig cfg;
    const std::array<RestrictionSet, 4>& hyps;

    RepOutcome observed(const MultiSeries& y, bool with_boot, std::uint64_t rep_seed,
                        int kilian_reps) const {
        RepOutcome out;
        const int T = y.T();
        const std::vector<int> counts{1, 1};

        BreakVector k_unres;
        Eigen::MatrixXd xi;
        SystemSearchResult unres;
        if (method == TestMethod::OLS_WALD) {
            k_unres.per_equation.resize(2);
            Eigen::MatrixXd residuals(2, T);
            std::vector<std::vector<double>> delta(2);
            for (int i = 0; i < 2; ++i) {
                auto [ki, ssr] = ols_break_search(y.values.row(i).transpose(), 1, cfg);
                (void)ssr;
                k_unres.per_equation[i] = ki;
                OlsFit fit = ols_fit_single(y.values.row(i).transpose(), ki);
                residuals.row(i) = fit.residuals.transpose();
                delta[i] = {fit.params.slope_changes[0]};
            }
            HacEstimate hac = long_run_variance(residuals);
            std::vector<std::vector<double>> lam{{clamp_frac(k_unres.per_equation[0][0], T)},
                                                 {clamp_frac(k_unres.per_equation[1][0], T)}};
            xi = assemble_eq_limit_cov(lam, delta, hac.psi).xi_s;
        } else {
            unres = system_break_search(y, counts, RestrictionSet::none(2), cfg);
            k_unres = unres.k;
            if (method == TestMethod::GLS_WALD) {
                HacEstimate hac = long_run_variance(unres.fit.residuals);
                Eigen::MatrixXd sigma = unres.fit.sigma;
                floor_psd(sigma);
                std::vector<std::vector<double>> lam{{clamp_frac(k_unres.per_equation[0][0], T)},
                                                     {clamp_frac(k_unres.per_equation[1][0], T)}};
                std::vector<std::vector<double>> delta{
                    {unres.fit.params[0].slope_changes[0]},
                    {unres.fit.params[1].slope_changes[0]}};
                xi = assemble_limit_cov(lam, delta, sigma, hac.psi).xi;
            }
        }

        for (int h = 0; h < 4; ++h) {
            SystemSearchResult res;
            bool need_restricted = method == TestMethod::LR || with_boot;
            if (need_restricted) res = system_break_search(y, counts, hyps[h], cfg);

            if (method == TestMethod::LR) {
                double stat = T * (res.log_det_sigma - unres.log_det_sigma);
                if (res.k == unres.k || stat < 0.0) stat = 0.0;
                out.stat[h] = stat;
            } else {
                Eigen::VectorXd dev = hyps[h].R * k_unres.fractions(T) - hyps[h].r;
                if (dev.isZero(0.0)) {
                    out.stat[h] = 0.0;
                } else {
                    Eigen::VectorXd sol = (hyps[h].R * xi * hyps[h].R.transpose()).ldlt().solve(dev);
                    out.stat[h] = static_cast<double>(T) * T * T * dev.dot(sol);
                }
            }
            out.p_asym[h] = chi_square_sf(out.stat[h], hyps[h].q());

            if (with_boot) {
                SystemFit null_fit = fgls_fit(y, res.k, cfg);
                VarModel var = fit_var1(null_fit.residuals);
                auto rng_k = make_engine(rep_seed, 1 + h);
                var = kilian_correct(var, null_fit.residuals, rng_k, kilian_reps);
                auto rng_s = make_engine(rep_seed, 16 + h);
                MultiSeries pseudo = make_null_sample(y, null_fit, res.k, var, rng_s);
                out.boot_stat[h] = run_test(method, pseudo, counts, hyps[h], cfg).statistic;
            }
        }
        return out;
    }

    static double clamp_frac(int k, int T) {
        double l = static_cast<double>(k) / T;
        return std::min(std::max(l, 1.0 / T), 1.0 - 1.0 / T);
    }
};

}  // namespace

TableResult run_table(TestMethod method, const std::vector<double>& deltas,
                      const std::vector<double>& alphas, const std::vector<double>& rhos,
                      const TableRunConfig& cfg) {
    TableResult table;
    table.method = method;
    table.replications = cfg.replications;
    table.level = cfg.level;
    const auto hyps = mc_hypotheses();
    SharedEval eval{method, cfg.search, hyps};

    int cell_index = 0;
    for (double delta : deltas)
        for (double alpha : alphas)
            for (double rho : rhos) {
                const std::uint64_t cell_seed =
                    derive_seed(cfg.seed, static_cast<std::uint64_t>(cell_index));
                ++cell_index;

                std::vector<RepOutcome> outcomes(cfg.replications);
                parallel_for(
                    cfg.replications,
                    [&](int r) {
                        const std::uint64_t rep_seed =
                            derive_seed(cell_seed, static_cast<std::uint64_t>(r));
                        DgpSpec spec;
                        spec.alpha = alpha;
                        spec.rho = rho;
                        spec.delta1 = spec.delta2 = delta;
                        auto rng = make_engine(rep_seed, 0);
                        MultiSeries y = generate_dgp(spec, rng);
                        outcomes[r] = eval.observed(y, cfg.with_bootstrap, rep_seed,
                                                    cfg.kilian_replications);
                    },
                    cfg.threads);

                TableCell cell;
                cell.alpha = alpha;
                cell.rho = rho;
                cell.delta = delta;
                cell.has_bootstrap = cfg.with_bootstrap;
                for (int h = 0; h < 4; ++h) {
                    int rej = 0;
                    for (const auto& o : outcomes)
                        if (o.p_asym[h] < cfg.level) ++rej;
                    cell.asymptotic[h] = static_cast<double>(rej) / cfg.replications;
                    if (cfg.with_bootstrap) {
                        std::vector<double> pool(cfg.replications);
                        for (int r = 0; r < cfg.replications; ++r) pool[r] = outcomes[r].boot_stat[h];
                        double cv = warp_quantile(pool, cfg.level);
                        int brej = 0;
                        for (const auto& o : outcomes)
                            if (o.stat[h] > cv) ++brej;
                        cell.bootstrap[h] = static_cast<double>(brej) / cfg.replications;
                    }
                }
                table.cells.push_back(cell);
            }
    return table;
}

std::string to_csv(const TableResult& table) {
    std::ostringstream os;
    os << "method,replications,alpha,rho,delta,hypothesis,asymptotic,bootstrap\n";
    for (const auto& c : table.cells)
        for (int h = 0; h < 4; ++h) {
            os << to_string(table.method) << ',' << table.replications << ',' << c.alpha << ','
               << c.rho << ',' << c.delta << ',' << (h + 1) << ',' << c.asymptotic[h] << ',';
            if (c.has_bootstrap) os << c.bootstrap[h];
            os << '\n';
        }
    return os.str();
}

std::string to_text(const TableResult& table) {
    std::ostringstream os;
    char buf[256];
    os << "Rejection probabilities, " << to_string(table.method) << " test ("
       << table.replications << " replications, nominal level " << table.level << ")\n";
    double last_delta = table.cells.empty() ? 0.0 : table.cells.front().delta;
    bool first = true;
    for (const auto& c : table.cells) {
        if (first || c.delta != last_delta) {
            os << "\ndelta = " << c.delta << '\n';
            os << "               Asymptotic                Bootstrap\n";
            os << " alpha  rho    (1)   (2)   (3)   (4)     (1)   (2)   (3)   (4)\n";
            last_delta = c.delta;
            first = false;
        }
        std::snprintf(buf, sizeof(buf), "%6.2f %5.2f  %5.2f %5.2f %5.2f %5.2f", c.alpha, c.rho,
                      c.asymptotic[0], c.asymptotic[1], c.asymptotic[2], c.asymptotic[3]);
        os << buf;
        if (c.has_bootstrap) {
            std::snprintf(buf, sizeof(buf), "   %5.2f %5.2f %5.2f %5.2f", c.bootstrap[0],
                          c.bootstrap[1], c.bootstrap[2], c.bootstrap[3]);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace segbreak
