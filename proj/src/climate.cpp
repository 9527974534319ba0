#include "segbreak/climate.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "segbreak/errors.hpp"

namespace segbreak {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
    }
    return out;
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size() || !std::isfinite(v)) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError("row " + std::to_string(row) + ", column '" + col +
                         "': cannot parse '" + cell + "' as a finite number");
    }
}

}  // namespace

int SeriesTable::find(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

Eigen::VectorXd SeriesTable::col(const std::string& name) const {
    int idx = find(name);
    if (idx < 0) throw ParseError("column '" + name + "' not present");
    return columns.col(idx);
}

SeriesTable load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto header = split_csv_line(line);
    if (header.size() < 2 || header[0] != "year")
        throw ParseError(path + ": header must be 'year,<name>[,...]'");

    SeriesTable table;
    table.names.assign(header.begin() + 1, header.end());
    std::vector<std::vector<double>> data(table.names.size());
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(path + ": row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(header.size()));
        double y = parse_cell(cells[0], row, "year");
        int year = static_cast<int>(y);
        if (static_cast<double>(year) != y)
            throw ParseError(path + ": row " + std::to_string(row) + ": non-integer year");
        if (!table.years.empty()) {
            if (year == table.years.back())
                throw ParseError(path + ": duplicate year " + std::to_string(year));
            if (year != table.years.back() + 1)
                throw ParseError(path + ": gap between years " +
                                 std::to_string(table.years.back()) + " and " +
                                 std::to_string(year));
        }
        table.years.push_back(year);
        for (std::size_t c = 0; c < table.names.size(); ++c)
            data[c].push_back(parse_cell(cells[c + 1], row, table.names[c]));
    }
    if (table.years.empty()) throw ParseError(path + ": no data rows");
    table.columns.resize(table.length(), static_cast<int>(table.names.size()));
    for (std::size_t c = 0; c < data.size(); ++c)
        for (int t = 0; t < table.length(); ++t) table.columns(t, static_cast<int>(c)) = data[c][t];
    return table;
}

SeriesTable load_series(const std::string& path, const std::vector<std::string>& columns) {
    SeriesTable full = load_series(path);
    SeriesTable out;
    out.years = full.years;
    out.names = columns;
    out.columns.resize(full.length(), static_cast<int>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        int idx = full.find(columns[c]);
        if (idx < 0) throw ParseError(path + ": column '" + columns[c] + "' not present");
        out.columns.col(static_cast<int>(c)) = full.columns.col(idx);
    }
    return out;
}

SeriesTable slice_years(const SeriesTable& table, int year_lo, int year_hi) {
    if (year_lo > year_hi) throw std::invalid_argument("slice_years: empty range");
    if (table.years.empty() || year_lo < table.years.front() || year_hi > table.years.back())
        throw std::invalid_argument("slice_years: range [" + std::to_string(year_lo) + ", " +
                                    std::to_string(year_hi) + "] not covered by the data");
    SeriesTable out;
    out.names = table.names;
    int offset = year_lo - table.years.front();
    int len = year_hi - year_lo + 1;
    out.years.assign(table.years.begin() + offset, table.years.begin() + offset + len);
    out.columns = table.columns.middleRows(offset, len);
    return out;
}

bool NamedSeries::covers(int year) const {
    return !years.empty() && year >= years.front() && year <= years.back();
}

double NamedSeries::at(int year) const {
    if (!covers(year))
        throw std::invalid_argument("series '" + name + "' does not cover year " +
                                    std::to_string(year));
    return values[year - years.front()];
}

NamedSeries extract(const SeriesTable& table, const std::string& name) {
    NamedSeries s;
    s.name = name;
    s.years = table.years;
    s.values = table.col(name);
    return s;
}

FilterSpec bic_select_filter(const NamedSeries& temp, const std::vector<NamedSeries>& modes,
                             int kmax) {
    const int T = static_cast<int>(temp.values.size());
    if (kmax < 1 || kmax >= T / 2) throw std::invalid_argument("bic_select_filter: bad kmax");
    const int n_est = T - kmax;

    // regression of temp on a constant plus the given (mode, lag) columns
    // over temp years [from, from + len)
    auto fit = [&](const std::vector<std::pair<int, int>>& sel, int from, int len, double* ssr_out,
                   Eigen::VectorXd* coef_out) {
        Eigen::MatrixXd X(len, 1 + sel.size());
        Eigen::VectorXd yv(len);
        for (int t = 0; t < len; ++t) {
            int year = temp.years[from + t];
            X(t, 0) = 1.0;
            yv[t] = temp.values[from + t];
            for (std::size_t j = 0; j < sel.size(); ++j)
                X(t, 1 + static_cast<int>(j)) = modes[sel[j].first].at(year - sel[j].second);
        }
        Eigen::VectorXd coef = X.colPivHouseholderQr().solve(yv);
        if (ssr_out) *ssr_out = (yv - X * coef).squaredNorm();
        if (coef_out) *coef_out = coef;
    };

    // odometer over modes: -1 = excluded, else the lag
    const int nm = static_cast<int>(modes.size());
    std::vector<int> lag(nm, -1);
    double best_bic = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> best_sel;
    for (;;) {
        std::vector<std::pair<int, int>> sel;
        for (int m = 0; m < nm; ++m)
            if (lag[m] >= 0) sel.emplace_back(m, lag[m]);
        double ssr = 0.0;
        fit(sel, kmax, n_est, &ssr, nullptr);
        double bic = n_est * std::log(ssr / n_est) +
                     (1.0 + static_cast<double>(sel.size())) * std::log(static_cast<double>(n_est));
        if (bic < best_bic) {
            best_bic = bic;
            best_sel = sel;
        }
        int m = nm - 1;
        while (m >= 0 && lag[m] == kmax - 1) lag[m--] = -1;
        if (m < 0) break;
        ++lag[m];
    }

    // refit the chosen set on all observations whose lagged regressors exist
    int from = 0;
    for (const auto& [mi, l] : best_sel)
        while (from < T && !modes[mi].covers(temp.years[from] - l)) ++from;
    if (T - from < 5) throw std::invalid_argument("bic_select_filter: too few usable observations");

    FilterSpec spec;
    spec.kmax = kmax;
    spec.bic = best_bic;
    for (const auto& [mi, l] : best_sel) spec.chosen.emplace_back(modes[mi].name, l);
    fit(best_sel, from, T - from, nullptr, &spec.coef);
    return spec;
}

NamedSeries filter_series(const NamedSeries& temp, const std::vector<NamedSeries>& modes,
                          const FilterSpec& spec) {
    NamedSeries out = temp;
    out.name = temp.name + "~";
    for (int t = 0; t < static_cast<int>(temp.values.size()); ++t) {
        double v = temp.values[t];
        for (std::size_t j = 0; j < spec.chosen.size(); ++j) {
            const auto& [name, l] = spec.chosen[j];
            auto it = std::find_if(modes.begin(), modes.end(),
                                   [&](const NamedSeries& m) { return m.name == name; });
            if (it == modes.end())
                throw std::invalid_argument("filter_series: mode '" + name + "' not supplied");
            v -= spec.coef[1 + static_cast<int>(j)] * it->at(temp.years[t] - l);
        }
        out.values[t] = v;
    }
    return out;
}

MultiSeries align_series(const std::vector<NamedSeries>& series, int year_lo, int year_hi) {
    if (series.empty()) throw std::invalid_argument("align_series: no series");
    int lo = series[0].years.front(), hi = series[0].years.back();
    for (const auto& s : series) {
        lo = std::max(lo, s.years.front());
        hi = std::min(hi, s.years.back());
    }
    if (year_lo != 0 || year_hi != 0) {
        if (year_lo < lo || year_hi > hi)
            throw std::invalid_argument("align_series: requested range [" +
                                        std::to_string(year_lo) + ", " + std::to_string(year_hi) +
                                        "] not covered by all series");
        lo = year_lo;
        hi = year_hi;
    }
    if (hi - lo + 1 < 5) throw std::invalid_argument("align_series: overlap too short");

    MultiSeries out;
    out.start_period = lo;
    out.values.resize(series.size(), hi - lo + 1);
    for (std::size_t i = 0; i < series.size(); ++i) {
        out.labels.push_back(series[i].name);
        for (int year = lo; year <= hi; ++year)
            out.values(static_cast<int>(i), year - lo) = series[i].at(year);
    }
    return out;
}

namespace {

std::vector<int> to_years(const std::vector<int>& dates, int start_period) {
    std::vector<int> out;
    for (int d : dates) out.push_back(start_period + d - 1);
    return out;
}

RestrictionSet pairwise_common(int m_per_eq) {
    std::vector<std::vector<int>> groups;
    for (int j = 0; j < m_per_eq; ++j) groups.push_back({j, m_per_eq + j});
    return RestrictionSet::common_groups(2 * m_per_eq, groups);
}

}  // namespace

std::vector<CommonBreakRow> analyze_common_breaks(const NamedSeries& forcing,
                                                  const std::vector<NamedSeries>& temps,
                                                  const CommonBreakOptions& opts) {
    std::vector<CommonBreakRow> rows;
    const int m = opts.breaks_per_equation;
    RestrictionSet restriction = pairwise_common(m);
    for (const auto& temp : temps) {
        MultiSeries y = align_series({forcing, temp}, opts.year_lo, opts.year_hi);
        const std::vector<int> counts{m, m};

        CommonBreakRow row;
        row.forcing = forcing.name;
        row.temp = temp.name;

        auto unres = system_break_search(y, counts, RestrictionSet::none(2 * m), opts.search);
        auto res = system_break_search(y, counts, restriction, opts.search);
        row.forcing_breaks = to_years(unres.k.per_equation[0], y.start_period);
        row.temp_breaks = to_years(unres.k.per_equation[1], y.start_period);
        row.common_breaks = to_years(res.k.per_equation[0], y.start_period);
        for (int i = 0; i < 2; ++i) {
            auto [ki, ssr] = ols_break_search(y.values.row(i).transpose(), m, opts.search);
            (void)ssr;
            (i == 0 ? row.forcing_breaks_eq : row.temp_breaks_eq) = to_years(ki, y.start_period);
        }

        for (TestMethod method : opts.methods) {
            CommonBreakRow::PValue pv;
            pv.method = method;
            if (opts.bootstrap) {
                TestReport rep =
                    test_with_bootstrap(method, y, counts, restriction, opts.search, opts.boot);
                pv.statistic = rep.statistic;
                pv.asymptotic = rep.p_asymptotic;
                pv.bootstrap = *rep.p_bootstrap;
                pv.has_bootstrap = true;
            } else {
                TestReport rep = run_test(method, y, counts, restriction, opts.search);
                pv.statistic = rep.statistic;
                pv.asymptotic = rep.p_asymptotic;
            }
            row.pvalues.push_back(pv);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<HiatusRow> analyze_hiatus(const NamedSeries& forcing,
                                      const std::vector<NamedSeries>& temps,
                                      const HiatusOptions& opts) {
    std::vector<HiatusRow> rows;
    for (const auto& temp : temps) {
        MultiSeries y = align_series({forcing, temp}, opts.year_lo, opts.year_hi);
        const std::vector<int> counts{1, 0};

        AddBreakHypothesis hyp;
        hyp.equation = 1;  // the temperature equation
        hyp.trim = opts.trim;
        AddBreakReport rep = extra_break_with_bootstrap(y, counts, hyp, opts.search, opts.boot);

        auto base = system_break_search(y, counts, RestrictionSet::none(1), opts.search);
        HiatusRow row;
        row.forcing = forcing.name;
        row.temp = temp.name;
        row.statistic = rep.statistic;
        row.p_bootstrap = rep.p_bootstrap.value_or(1.0);
        row.forcing_break_year = y.start_period + base.k.per_equation[0][0] - 1;
        row.alt_break_year = y.start_period + rep.nu_hat - 1;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace segbreak
