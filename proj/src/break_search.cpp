#include "segbreak/break_search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "segbreak/errors.hpp"
#include "system_eval.hpp"

namespace segbreak {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

// Union-find over flat break indices carrying integer date offsets to the
// root, so linked dates move together during enumeration.
struct OffsetGroups {
    std::vector<int> parent, off;

    explicit OffsetGroups(int m) : parent(m), off(m, 0) { std::iota(parent.begin(), parent.end(), 0); }

    // returns (root, k_a - k_root)
    std::pair<int, int> find(int a) {
        if (parent[a] == a) return {a, 0};
        auto [root, o] = find(parent[a]);
        parent[a] = root;
        off[a] += o;
        return {root, off[a]};
    }

    // impose k_a = k_b + d; returns false on an inconsistent cycle
    bool link(int a, int b, int d) {
        auto [ra, oa] = find(a);
        auto [rb, ob] = find(b);
        if (ra == rb) return oa - ob == d;
        parent[rb] = ra;
        off[rb] = oa - d - ob;
        return true;
    }
};

struct FlatLayout {
    std::vector<int> eq_of, pos_of;  // flat index -> (equation, within-equation position)
    std::vector<int> counts;
    int m = 0;

    explicit FlatLayout(const std::vector<int>& c) : counts(c) {
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int j = 0; j < c[i]; ++j) {
                eq_of.push_back(static_cast<int>(i));
                pos_of.push_back(j);
                ++m;
            }
    }
};

}  // namespace

int SearchConfig::effective_min_separation(int T) const {
    if (min_separation > 0) return min_separation;
    return std::max(3, static_cast<int>(std::ceil(0.05 * T)));
}

std::pair<int, int> SearchConfig::date_bounds(int T) const {
    if (!(trim_fraction > 0.0 && trim_fraction < 0.5))
        throw std::invalid_argument("SearchConfig: trim_fraction must lie in (0, 0.5)");
    int lo = std::max(2, static_cast<int>(std::ceil(trim_fraction * T)));
    int hi = std::min(T - 2, static_cast<int>(std::floor((1.0 - trim_fraction) * T)));
    return {lo, hi};
}

RestrictionSet RestrictionSet::none(int m) {
    RestrictionSet rs;
    rs.kind = RestrictionKind::none;
    rs.R.resize(0, m);
    rs.r.resize(0);
    return rs;
}

RestrictionSet RestrictionSet::fixed_dates(const std::vector<double>& fracs) {
    RestrictionSet rs;
    rs.kind = RestrictionKind::fixed_dates;
    const int m = static_cast<int>(fracs.size());
    rs.R = Eigen::MatrixXd::Identity(m, m);
    rs.r.resize(m);
    for (int j = 0; j < m; ++j) {
        rs.r[j] = fracs[j];
        rs.pins.push_back({j, fracs[j]});
    }
    return rs;
}

RestrictionSet RestrictionSet::common_groups(int m, const std::vector<std::vector<int>>& groups) {
    RestrictionSet rs;
    rs.kind = RestrictionKind::common_groups;
    int q = 0;
    for (const auto& g : groups) q += std::max<int>(0, static_cast<int>(g.size()) - 1);
    rs.R = Eigen::MatrixXd::Zero(q, m);
    rs.r = Eigen::VectorXd::Zero(q);
    int row = 0;
    for (const auto& g : groups) {
        for (std::size_t j = 1; j < g.size(); ++j) {
            if (g[0] < 0 || g[0] >= m || g[j] < 0 || g[j] >= m)
                throw std::invalid_argument("RestrictionSet: group index out of range");
            rs.R(row, g[0]) = 1.0;
            rs.R(row, g[j]) = -1.0;
            rs.links.push_back({g[0], g[j], 0.0});
            ++row;
        }
    }
    return rs;
}

RestrictionSet RestrictionSet::fixed_offsets(int m, const std::vector<Link>& offset_links) {
    RestrictionSet rs;
    rs.kind = RestrictionKind::fixed_offsets;
    const int q = static_cast<int>(offset_links.size());
    rs.R = Eigen::MatrixXd::Zero(q, m);
    rs.r.resize(q);
    for (int row = 0; row < q; ++row) {
        const Link& l = offset_links[row];
        if (l.a < 0 || l.a >= m || l.b < 0 || l.b >= m || l.a == l.b)
            throw std::invalid_argument("RestrictionSet: bad offset link");
        rs.R(row, l.a) = 1.0;
        rs.R(row, l.b) = -1.0;
        rs.r[row] = l.offset;
        rs.links.push_back(l);
    }
    return rs;
}

OlsFit ols_fit_single(const Eigen::VectorXd& y, const std::vector<int>& breaks) {
    const int T = static_cast<int>(y.size());
    Eigen::MatrixXd X = build_regressors(T, breaks);
    Eigen::VectorXd theta = X.colPivHouseholderQr().solve(y);
    if (!theta.allFinite()) throw NumericalError("ols_fit_single: singular normal equations");
    OlsFit fit;
    fit.params.intercept = theta[0];
    fit.params.slope = theta[1];
    fit.params.slope_changes = theta.tail(theta.size() - 2);
    fit.residuals = y - X * theta;
    fit.ssr = fit.residuals.squaredNorm();
    return fit;
}

namespace {

// Enumerates strictly increasing m-tuples in [lo, hi] with the given
// minimum separation, in lexicographic order.
template <typename Fn>
void for_each_tuple(int m, int lo, int hi, int sep, std::vector<int>& buf, int pos, Fn&& fn) {
    if (pos == m) {
        fn(buf);
        return;
    }
    int start = pos == 0 ? lo : buf[pos - 1] + sep;
    for (int k = start; k <= hi; ++k) {
        buf[pos] = k;
        for_each_tuple(m, lo, hi, sep, buf, pos + 1, fn);
    }
}

}  // namespace

std::pair<std::vector<int>, double> ols_break_search(const Eigen::VectorXd& y, int m,
                                                     const SearchConfig& cfg) {
    const int T = static_cast<int>(y.size());
    if (m < 0) throw std::invalid_argument("ols_break_search: negative break count");
    if (m == 0) {
        auto fit = ols_fit_single(y, {});
        return {{}, fit.ssr};
    }
    auto [lo, hi] = cfg.date_bounds(T);
    const int sep = cfg.effective_min_separation(T);
    if (lo > hi || lo + (m - 1) * sep > hi)
        throw std::invalid_argument("ols_break_search: admissible grid is empty");

    detail::SystemEvaluator eval(y.transpose());
    auto w = eval.make_workspace(m);
    std::vector<std::vector<int>> dates(1);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_k;
    std::vector<int> buf(m);
    for_each_tuple(m, lo, hi, sep, buf, 0, [&](const std::vector<int>& k) {
        dates[0] = k;
        double ssr = eval.ols_trace(dates, w);
        if (ssr < best) {
            best = ssr;
            best_k = k;
        }
    });
    return {best_k, best};
}

SystemFit fgls_fit(const MultiSeries& y, const BreakVector& k, const SearchConfig& cfg) {
    y.validate();
    const int n = y.n(), T = y.T();
    if (k.equations() != n) throw std::invalid_argument("fgls_fit: break vector / panel mismatch");
    k.validate(T, 1);

    std::vector<Eigen::MatrixXd> X(n);
    std::vector<int> p(n), off(n);
    int P = 0;
    for (int i = 0; i < n; ++i) {
        X[i] = build_regressors(T, k.per_equation[i]);
        p[i] = static_cast<int>(X[i].cols());
        off[i] = P;
        P += p[i];
    }
    std::vector<Eigen::MatrixXd> XtX(n * n);
    std::vector<Eigen::VectorXd> Xty(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            XtX[i * n + j] = X[i].transpose() * X[j];
            Xty[i * n + j] = X[i].transpose() * y.values.row(j).transpose();
        }

    Eigen::MatrixXd Sinv = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd A(P, P), U(n, T), S(n, n);
    Eigen::VectorXd rhs(P), theta(P);
    double prev = std::numeric_limits<double>::quiet_NaN();
    double logdet = 0.0;
    bool converged = false;
    int it = 0;
    for (; it < std::max(cfg.max_fgls_iter, 1); ++it) {
        for (int i = 0; i < n; ++i) {
            rhs.segment(off[i], p[i]).setZero();
            for (int j = 0; j < n; ++j) {
                A.block(off[i], off[j], p[i], p[j]) = Sinv(i, j) * XtX[i * n + j];
                rhs.segment(off[i], p[i]) += Sinv(i, j) * Xty[i * n + j];
            }
        }
        theta = A.ldlt().solve(rhs);
        if (!theta.allFinite()) throw NumericalError("fgls_fit: GLS normal equations are singular");
        for (int i = 0; i < n; ++i)
            U.row(i) = y.values.row(i) - (X[i] * theta.segment(off[i], p[i])).transpose();
        S = U * U.transpose() / T;
        detail::CovInfo info = detail::analyze_cov(S);
        logdet = info.logdet;
        if (info.degenerate || (it > 0 && std::abs(info.logdet - prev) < cfg.fgls_tol)) {
            converged = true;
            ++it;
            break;
        }
        prev = info.logdet;
        Sinv = info.inv;
    }

    SystemFit fit;
    fit.params.resize(n);
    for (int i = 0; i < n; ++i) {
        fit.params[i].intercept = theta[off[i]];
        fit.params[i].slope = theta[off[i] + 1];
        fit.params[i].slope_changes = theta.segment(off[i] + 2, p[i] - 2);
    }
    fit.sigma = S;
    fit.residuals = U;
    fit.log_det_sigma = logdet;
    fit.loglik = -0.5 * n * T * (std::log(2.0 * std::numbers::pi) + 1.0) - 0.5 * T * logdet;
    fit.iterations = it;
    fit.converged = converged;
    return fit;
}

SystemSearchResult system_break_search(const MultiSeries& y, const std::vector<int>& counts,
                                       const RestrictionSet& restriction, const SearchConfig& cfg,
                                       SearchObjective objective) {
    y.validate();
    const int n = y.n(), T = y.T();
    if (static_cast<int>(counts.size()) != n)
        throw std::invalid_argument("system_break_search: counts / panel mismatch");
    FlatLayout layout(counts);
    if (restriction.kind != RestrictionKind::none && restriction.m() != layout.m)
        throw std::invalid_argument("system_break_search: restriction dimension mismatch");

    auto [lo, hi] = cfg.date_bounds(T);
    const int sep = cfg.effective_min_separation(T);

    // Resolve the restriction at the date level.
    OffsetGroups groups(std::max(layout.m, 1));
    for (const auto& l : restriction.links)
        if (!groups.link(l.a, l.b, round_half_up(l.offset * T)))
            throw std::invalid_argument("system_break_search: restriction infeasible on integer grid");
    std::vector<int> pinned(std::max(layout.m, 1), std::numeric_limits<int>::min());
    for (const auto& pin : restriction.pins) {
        auto [root, o] = groups.find(pin.a);
        int date = round_half_up(pin.frac * T) - o;
        if (pinned[root] != std::numeric_limits<int>::min() && pinned[root] != date)
            throw std::invalid_argument("system_break_search: restriction infeasible on integer grid");
        pinned[root] = date;
    }

    // Free roots and their feasible ranges (every member must stay in [lo, hi]).
    std::vector<int> root_of(layout.m), off_of(layout.m);
    for (int a = 0; a < layout.m; ++a) {
        auto [root, o] = groups.find(a);
        root_of[a] = root;
        off_of[a] = o;
    }
    std::vector<int> free_roots;
    std::vector<int> range_lo(std::max(layout.m, 1), lo), range_hi(std::max(layout.m, 1), hi);
    for (int a = 0; a < layout.m; ++a) {
        range_lo[root_of[a]] = std::max(range_lo[root_of[a]], lo - off_of[a]);
        range_hi[root_of[a]] = std::min(range_hi[root_of[a]], hi - off_of[a]);
    }
    for (int a = 0; a < layout.m; ++a)
        if (root_of[a] == a && pinned[a] == std::numeric_limits<int>::min()) {
            if (range_lo[a] > range_hi[a])
                throw std::invalid_argument("system_break_search: restricted grid is empty");
            free_roots.push_back(a);
        }

    detail::SystemEvaluator eval(y.values);
    int max_m = 0;
    for (int c : counts) max_m = std::max(max_m, c);
    auto w = eval.make_workspace(std::max(max_m, 1));

    std::vector<std::vector<int>> dates(n);
    for (int i = 0; i < n; ++i) dates[i].resize(counts[i]);
    std::vector<int> assign(free_roots.size());
    std::vector<int> free_index_of(layout.m, -1);
    for (std::size_t d = 0; d < free_roots.size(); ++d) free_index_of[free_roots[d]] = static_cast<int>(d);

    double best = std::numeric_limits<double>::infinity();
    BreakVector best_k;
    bool found = false;

    auto evaluate_assignment = [&]() {
        // materialize and validate the candidate
        for (int a = 0; a < layout.m; ++a) {
            int root = root_of[a];
            int root_date =
                free_index_of[root] >= 0 ? assign[free_index_of[root]] : pinned[root];
            int date = root_date + off_of[a];
            if (date < lo || date > hi) return;
            if (layout.pos_of[a] > 0 && date - dates[layout.eq_of[a]][layout.pos_of[a] - 1] < sep)
                return;
            dates[layout.eq_of[a]][layout.pos_of[a]] = date;
        }
        double value = objective == SearchObjective::fgls_logdet
                           ? eval.fgls_logdet(dates, cfg.max_fgls_iter, cfg.fgls_tol, w)
                           : eval.ols_trace(dates, w);
        if (!found || value < best) {
            best = value;
            best_k.per_equation = dates;
            found = true;
        }
    };

    // odometer over the free roots, last root fastest: candidates appear in
    // lexicographic date order, so keeping the first strict minimum breaks
    // ties toward the earliest break vector
    std::function<void(std::size_t)> enumerate = [&](std::size_t d) {
        if (d == free_roots.size()) {
            evaluate_assignment();
            return;
        }
        int root = free_roots[d];
        for (int date = range_lo[root]; date <= range_hi[root]; ++date) {
            assign[d] = date;
            enumerate(d + 1);
        }
    };
    enumerate(0);

    if (!found) throw std::invalid_argument("system_break_search: restricted grid is empty");

    SystemSearchResult result;
    result.k = best_k;
    result.fit = fgls_fit(y, best_k, cfg);
    result.log_det_sigma = best;
    return result;
}

}  // namespace segbreak
