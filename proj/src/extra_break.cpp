#include "segbreak/extra_break.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "segbreak/errors.hpp"
#include "system_eval.hpp"

namespace segbreak {

std::vector<int> admissible_grid(const BreakVector& k, int equation, double trim, int T) {
    if (equation < 0 || equation >= k.equations())
        throw std::invalid_argument("admissible_grid: bad equation index");
    if (!(trim > 0.0 && trim < 0.5))
        throw std::invalid_argument("admissible_grid: trim must lie in (0, 0.5)");
    const auto& existing = k.per_equation[equation];
    for (int date : existing) {
        double lam = static_cast<double>(date) / T;
        if (!(trim < std::min(lam, 1.0 - lam)))
            throw std::invalid_argument("admissible_grid: trim too large for existing breaks");
    }
    // comparisons at the integer date level with a tolerance so that exact
    // fraction boundaries (e.g. |40/100 - 50/100| = 0.1) stay admissible
    const double dist = trim * T;
    std::vector<int> grid;
    for (int h = 2; h <= T - 2; ++h) {
        if (h < dist - 1e-9 || h > T - dist + 1e-9) continue;
        bool ok = true;
        for (int date : existing)
            if (std::abs(h - date) < dist - 1e-9) {
                ok = false;
                break;
            }
        if (ok) grid.push_back(h);
    }
    if (grid.empty()) throw std::invalid_argument("admissible_grid: no admissible dates");
    return grid;
}

namespace {

// argmax comparisons treat sub-1e-6 gaps as ties (kept for the earlier
// candidate); exactly duplicated equations then resolve deterministically
// instead of on rounding noise
bool improves(double candidate, double incumbent) {
    return candidate > incumbent + 1e-6 * std::max(1.0, std::abs(incumbent));
}

}  // namespace

AddBreakReport lr_extra_break(const MultiSeries& y, const BreakVector& k, int equation,
                              double trim, const SearchConfig& cfg) {
    y.validate();
    const int T = y.T();
    if (k.equations() != y.n())
        throw std::invalid_argument("lr_extra_break: break vector / panel mismatch");
    std::vector<int> grid = admissible_grid(k, equation, trim, T);

    detail::SystemEvaluator eval(y.values);
    int max_m = 1;
    for (const auto& dates : k.per_equation)
        max_m = std::max(max_m, static_cast<int>(dates.size()) + 1);
    auto w = eval.make_workspace(max_m);

    std::vector<std::vector<int>> base = k.per_equation;
    const double ld0 = eval.fgls_logdet(base, cfg.max_fgls_iter, cfg.fgls_tol, w);

    AddBreakReport report;
    report.equation_hat = equation;
    report.profile.reserve(grid.size());
    bool any = false;
    int failures = 0;
    for (int h : grid) {
        std::vector<std::vector<int>> dates = base;
        auto& aug = dates[equation];
        aug.insert(std::upper_bound(aug.begin(), aug.end(), h), h);
        double lr;
        try {
            lr = T * (ld0 - eval.fgls_logdet(dates, cfg.max_fgls_iter, cfg.fgls_tol, w));
        } catch (const std::exception&) {
            ++failures;
            continue;
        }
        if (lr < 0.0) lr = 0.0;  // augmented model nests the null
        report.profile.emplace_back(h, lr);
        if (!any || improves(lr, report.statistic)) {
            report.statistic = lr;
            report.nu_hat = h;
            any = true;
        }
    }
    if (!any) throw NumericalError("lr_extra_break: every candidate date failed");
    if (failures > 0)
        report.profile.shrink_to_fit();
    return report;
}

AddBreakReport sup_lr_extra_break(const MultiSeries& y, const BreakVector& k, double trim,
                                  const SearchConfig& cfg) {
    AddBreakReport best;
    bool any = false;
    for (int i = 0; i < y.n(); ++i) {
        AddBreakReport rep;
        try {
            rep = lr_extra_break(y, k, i, trim, cfg);
        } catch (const std::invalid_argument&) {
            continue;  // equation with no admissible dates
        }
        if (!any || improves(rep.statistic, best.statistic)) {
            best = rep;
            best.equation_hat = i;
            any = true;
        }
    }
    if (!any) throw std::invalid_argument("sup_lr_extra_break: no equation has admissible dates");
    return best;
}

}  // namespace segbreak
