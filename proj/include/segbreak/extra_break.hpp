#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "segbreak/break_search.hpp"
#include "segbreak/trend_model.hpp"

namespace segbreak {

/// One-additional-break alternative: the base break configuration is held
/// fixed and a single extra slope change is profiled over the admissible
/// dates of one equation (or the best equation when unspecified).
struct AddBreakHypothesis {
    std::optional<int> equation;  // 0-based; absent = sup over all equations
    double trim = 0.1;            // minimum fractional distance from ends and existing breaks
};

struct AddBreakReport {
    double statistic = 0.0;
    int nu_hat = 0;        // date of the profiled extra break at the optimum
    int equation_hat = 0;  // 0-based equation attaining the sup
    std::optional<double> p_bootstrap;
    std::vector<std::pair<int, double>> profile;  // (date, LR(date)) over the grid
};

/// Integer dates h with trim <= h/T <= 1-trim and |h/T - k_ij/T| >= trim
/// for every existing break of the equation. Throws when empty.
std::vector<int> admissible_grid(const BreakVector& k, int equation, double trim, int T);

/// Likelihood-ratio profile for one extra break in `equation`, the base
/// dates `k` fixed under both hypotheses. Ties in the profile maximum go
/// to the earliest date.
AddBreakReport lr_extra_break(const MultiSeries& y, const BreakVector& k, int equation,
                              double trim, const SearchConfig& cfg = {});

/// Maximum of the per-equation profiles; ties go to the lowest equation
/// index.
AddBreakReport sup_lr_extra_break(const MultiSeries& y, const BreakVector& k, double trim,
                                  const SearchConfig& cfg = {});

}  // namespace segbreak
