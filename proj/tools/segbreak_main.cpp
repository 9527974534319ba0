// Command-line front end: break-date estimation, common-break and
// additional-break tests with bootstrap p-values, natural-variability
// filtering, and the Monte Carlo size/power tables.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "segbreak/climate.hpp"
#include "segbreak/errors.hpp"
#include "segbreak/monte_carlo.hpp"

using namespace segbreak;

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

std::pair<int, int> parse_range(const std::string& s) {
    auto sep = s.find(':');
    if (sep == std::string::npos)
        throw std::invalid_argument("--range expects <y1>:<y2>, got '" + s + "'");
    return {std::stoi(s.substr(0, sep)), std::stoi(s.substr(sep + 1))};
}

NamedSeries load_first_series(const std::string& path) {
    SeriesTable table = load_series(path);
    return extract(table, table.names.front());
}

std::string years_str(const std::vector<int>& years) {
    std::string out;
    for (std::size_t i = 0; i < years.size(); ++i) {
        if (i) out += "/";
        out += std::to_string(years[i]);
    }
    return out.empty() ? "-" : out;
}

struct CommonArgs {
    std::uint64_t seed = 1;
    int boot_reps = 199;
    std::string range;
    std::string format = "text";
    double trim_fraction = 0.05;
    int min_separation = 0;

    SearchConfig search() const {
        SearchConfig cfg;
        cfg.trim_fraction = trim_fraction;
        cfg.min_separation = min_separation;
        return cfg;
    }
    BootstrapConfig boot() const {
        BootstrapConfig b;
        b.replications = boot_reps;
        b.seed = seed;
        return b;
    }
    std::pair<int, int> year_range() const {
        if (range.empty()) return {0, 0};
        return parse_range(range);
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--seed", args.seed, "random seed");
    cmd->add_option("--boot-reps", args.boot_reps, "bootstrap replications (0 = asymptotic only)");
    cmd->add_option("--range", args.range, "restrict to <y1>:<y2>");
    cmd->add_option("--format", args.format, "text|csv")
        ->check(CLI::IsMember({"text", "csv"}));
    cmd->add_option("--trim", args.trim_fraction, "estimation trim fraction");
    cmd->add_option("--min-sep", args.min_separation, "minimum periods between breaks (0 = auto)");
}

TestMethod parse_method(const std::string& s) {
    if (s == "lr") return TestMethod::LR;
    if (s == "gls-wald") return TestMethod::GLS_WALD;
    if (s == "ols-wald") return TestMethod::OLS_WALD;
    throw std::invalid_argument("unknown method '" + s + "'");
}

RestrictionSet parse_restriction(const std::string& s, const std::vector<int>& counts) {
    int m = 0;
    for (int c : counts) m += c;
    if (s == "common") {
        // break j of every equation shares one date
        int mmax = *std::max_element(counts.begin(), counts.end());
        std::vector<std::vector<int>> groups(mmax);
        int flat = 0;
        for (int c : counts) {
            for (int j = 0; j < c; ++j) groups[j].push_back(flat + j);
            flat += c;
        }
        groups.erase(std::remove_if(groups.begin(), groups.end(),
                                    [](const auto& g) { return g.size() < 2; }),
                     groups.end());
        if (groups.empty()) throw std::invalid_argument("common restriction needs matched breaks");
        return RestrictionSet::common_groups(m, groups);
    }
    if (s.rfind("fixed:", 0) == 0) {
        auto fracs = parse_double_list(s.substr(6));
        if (static_cast<int>(fracs.size()) != m)
            throw std::invalid_argument("fixed: needs one fraction per break");
        return RestrictionSet::fixed_dates(fracs);
    }
    if (s.rfind("offset:", 0) == 0) {
        double c = std::stod(s.substr(7));
        if (m != 2) throw std::invalid_argument("offset: supported for two-break systems");
        return RestrictionSet::fixed_offsets(2, {{0, 1, c}});
    }
    throw std::invalid_argument("unknown restriction '" + s + "'");
}

int cmd_estimate(const std::vector<std::string>& files, const std::string& breaks,
                 const CommonArgs& args) {
    std::vector<NamedSeries> series;
    for (const auto& f : files) series.push_back(load_first_series(f));
    auto [lo, hi] = args.year_range();
    MultiSeries y = align_series(series, lo, hi);
    std::vector<int> counts =
        breaks.empty() ? std::vector<int>(series.size(), 1) : parse_int_list(breaks);
    if (counts.size() != series.size())
        throw std::invalid_argument("--breaks needs one count per input file");
    int m = 0;
    for (int c : counts) m += c;

    auto result = system_break_search(y, counts, RestrictionSet::none(m), args.search());
    if (args.format == "csv") {
        std::printf("series,breaks,slope,slope_changes\n");
        for (int i = 0; i < y.n(); ++i) {
            std::vector<int> yrs;
            for (int d : result.k.per_equation[i]) yrs.push_back(y.start_period + d - 1);
            std::printf("%s,%s,%.6g,", y.labels[i].c_str(), years_str(yrs).c_str(),
                        result.fit.params[i].slope);
            for (Eigen::Index j = 0; j < result.fit.params[i].slope_changes.size(); ++j)
                std::printf(j ? "/%.6g" : "%.6g", result.fit.params[i].slope_changes[j]);
            std::printf("\n");
        }
    } else {
        std::printf("Sample %d-%d (T=%d), log det Sigma = %.6f\n", y.start_period,
                    y.start_period + y.T() - 1, y.T(), result.log_det_sigma);
        for (int i = 0; i < y.n(); ++i) {
            std::vector<int> yrs;
            for (int d : result.k.per_equation[i]) yrs.push_back(y.start_period + d - 1);
            std::printf("  %-12s breaks at %s\n", y.labels[i].c_str(), years_str(yrs).c_str());
        }
    }
    return 0;
}

int cmd_test_common(const std::vector<std::string>& files, const std::string& breaks,
                    const std::string& method_str, const std::string& restriction_str,
                    bool pairwise, const CommonArgs& args) {
    std::vector<NamedSeries> series;
    for (const auto& f : files) series.push_back(load_first_series(f));
    auto [lo, hi] = args.year_range();

    std::vector<TestMethod> methods;
    if (method_str == "all")
        methods = {TestMethod::GLS_WALD, TestMethod::LR, TestMethod::OLS_WALD};
    else
        methods = {parse_method(method_str)};

    if (pairwise) {
        if (series.size() < 2) throw std::invalid_argument("--pairwise needs >= 2 files");
        if (restriction_str != "common")
            throw std::invalid_argument("--pairwise supports the common restriction only");
        CommonBreakOptions opts;
        opts.breaks_per_equation = breaks.empty() ? 1 : parse_int_list(breaks).at(0);
        opts.methods = methods;
        opts.bootstrap = args.boot_reps > 0;
        opts.boot = args.boot();
        opts.search = args.search();
        opts.year_lo = lo;
        opts.year_hi = hi;
        std::vector<NamedSeries> temps(series.begin() + 1, series.end());
        auto rows = analyze_common_breaks(series[0], temps, opts);

        if (args.format == "csv") {
            std::printf("forcing,temp,forcing_breaks,temp_breaks,common_breaks");
            for (auto mth : methods)
                std::printf(",%s_asym,%s_boot", to_string(mth).c_str(), to_string(mth).c_str());
            std::printf("\n");
            for (const auto& row : rows) {
                std::printf("%s,%s,%s,%s,%s", row.forcing.c_str(), row.temp.c_str(),
                            years_str(row.forcing_breaks).c_str(),
                            years_str(row.temp_breaks).c_str(),
                            years_str(row.common_breaks).c_str());
                for (const auto& pv : row.pvalues)
                    std::printf(",%.4f,%s", pv.asymptotic,
                                pv.has_bootstrap ? std::to_string(pv.bootstrap).c_str() : "");
                std::printf("\n");
            }
        } else {
            for (const auto& row : rows) {
                std::printf("%s vs %s: forcing %s, temp %s, common %s\n", row.forcing.c_str(),
                            row.temp.c_str(), years_str(row.forcing_breaks).c_str(),
                            years_str(row.temp_breaks).c_str(),
                            years_str(row.common_breaks).c_str());
                for (const auto& pv : row.pvalues) {
                    std::printf("    %-9s stat %8.3f  p_asym %.4f", to_string(pv.method).c_str(),
                                pv.statistic, pv.asymptotic);
                    if (pv.has_bootstrap) std::printf("  p_boot %.4f", pv.bootstrap);
                    std::printf("\n");
                }
            }
        }
        return 0;
    }

    MultiSeries y = align_series(series, lo, hi);
    std::vector<int> counts =
        breaks.empty() ? std::vector<int>(series.size(), 1) : parse_int_list(breaks);
    if (counts.size() != series.size())
        throw std::invalid_argument("--breaks needs one count per input file");
    RestrictionSet restriction = parse_restriction(restriction_str, counts);

    if (args.format == "csv")
        std::printf("method,statistic,df,p_asym,p_boot,k_restricted,k_unrestricted\n");
    for (auto method : methods) {
        TestReport rep =
            args.boot_reps > 0
                ? test_with_bootstrap(method, y, counts, restriction, args.search(), args.boot())
                : run_test(method, y, counts, restriction, args.search());
        auto k_to_years = [&](const BreakVector& k) {
            std::vector<int> yrs;
            for (const auto& eq : k.per_equation)
                for (int d : eq) yrs.push_back(y.start_period + d - 1);
            return years_str(yrs);
        };
        if (args.format == "csv") {
            std::printf("%s,%.6f,%d,%.6f,%s,%s,%s\n", to_string(method).c_str(), rep.statistic,
                        rep.df, rep.p_asymptotic,
                        rep.p_bootstrap ? std::to_string(*rep.p_bootstrap).c_str() : "",
                        k_to_years(rep.k_restricted).c_str(),
                        k_to_years(rep.k_unrestricted).c_str());
        } else {
            std::printf("%-9s stat %10.4f (df %d)  p_asym %.4f", to_string(method).c_str(),
                        rep.statistic, rep.df, rep.p_asymptotic);
            if (rep.p_bootstrap) std::printf("  p_boot %.4f", *rep.p_bootstrap);
            std::printf("  restricted %s  unrestricted %s\n", k_to_years(rep.k_restricted).c_str(),
                        k_to_years(rep.k_unrestricted).c_str());
            for (const auto& wmsg : rep.warnings) std::printf("    warning: %s\n", wmsg.c_str());
        }
    }
    return 0;
}

int cmd_test_extra(const std::vector<std::string>& files, const std::string& breaks,
                   std::optional<int> equation, double trim, bool pairwise,
                   const CommonArgs& args) {
    std::vector<NamedSeries> series;
    for (const auto& f : files) series.push_back(load_first_series(f));
    auto [lo, hi] = args.year_range();

    if (pairwise) {
        if (series.size() < 2) throw std::invalid_argument("--pairwise needs >= 2 files");
        HiatusOptions opts;
        opts.trim = trim;
        opts.boot = args.boot();
        opts.search = args.search();
        opts.year_lo = lo;
        opts.year_hi = hi;
        std::vector<NamedSeries> temps(series.begin() + 1, series.end());
        auto rows = analyze_hiatus(series[0], temps, opts);
        if (args.format == "csv") {
            std::printf("forcing,temp,statistic,p_boot,forcing_break,alt_break\n");
            for (const auto& row : rows)
                std::printf("%s,%s,%.6f,%.4f,%d,%d\n", row.forcing.c_str(), row.temp.c_str(),
                            row.statistic, row.p_bootstrap, row.forcing_break_year,
                            row.alt_break_year);
        } else {
            for (const auto& row : rows)
                std::printf("%s vs %s: supLR %.3f, p_boot %.4f, forcing break %d, "
                            "temperature break under H1 %d\n",
                            row.forcing.c_str(), row.temp.c_str(), row.statistic, row.p_bootstrap,
                            row.forcing_break_year, row.alt_break_year);
        }
        return 0;
    }

    MultiSeries y = align_series(series, lo, hi);
    std::vector<int> counts =
        breaks.empty() ? std::vector<int>(series.size(), 0) : parse_int_list(breaks);
    if (counts.size() != series.size())
        throw std::invalid_argument("--breaks needs one count per input file");
    AddBreakHypothesis hyp;
    if (equation) hyp.equation = *equation - 1;  // CLI is 1-based
    hyp.trim = trim;
    AddBreakReport rep =
        args.boot_reps > 0
            ? extra_break_with_bootstrap(y, counts, hyp, args.search(), args.boot())
            : [&] {
                  int m = 0;
                  for (int c : counts) m += c;
                  auto base = system_break_search(y, counts, RestrictionSet::none(m), args.search());
                  return hyp.equation
                             ? lr_extra_break(y, base.k, *hyp.equation, hyp.trim, args.search())
                             : sup_lr_extra_break(y, base.k, hyp.trim, args.search());
              }();
    int break_year = y.start_period + rep.nu_hat - 1;
    if (args.format == "csv") {
        std::printf("statistic,equation,break,p_boot\n");
        std::printf("%.6f,%s,%d,%s\n", rep.statistic, y.labels[rep.equation_hat].c_str(),
                    break_year, rep.p_bootstrap ? std::to_string(*rep.p_bootstrap).c_str() : "");
    } else {
        std::printf("supLR %.4f at %d in equation %s", rep.statistic, break_year,
                    y.labels[rep.equation_hat].c_str());
        if (rep.p_bootstrap) std::printf(", p_boot %.4f", *rep.p_bootstrap);
        std::printf("\n");
    }
    return 0;
}

int cmd_filter(const std::string& temp_file, const std::vector<std::string>& mode_files, int kmax,
               const std::string& out_file, const CommonArgs& args) {
    NamedSeries temp = load_first_series(temp_file);
    auto [lo, hi] = args.year_range();
    if (lo != 0 || hi != 0) {
        SeriesTable t;
        t.years = temp.years;
        t.names = {temp.name};
        t.columns = temp.values;
        t = slice_years(t, lo, hi);
        temp = extract(t, temp.name);
    }
    std::vector<NamedSeries> modes;
    for (const auto& f : mode_files) modes.push_back(load_first_series(f));

    FilterSpec spec = bic_select_filter(temp, modes, kmax);
    NamedSeries filtered = filter_series(temp, modes, spec);

    std::fprintf(stderr, "chosen regressors (kmax=%d, BIC=%.3f):", spec.kmax, spec.bic);
    if (spec.chosen.empty()) std::fprintf(stderr, " none");
    for (std::size_t j = 0; j < spec.chosen.size(); ++j)
        std::fprintf(stderr, " %s(lag %d, coef %.4f)", spec.chosen[j].first.c_str(),
                     spec.chosen[j].second, spec.coef[1 + static_cast<int>(j)]);
    std::fprintf(stderr, "\n");

    FILE* out = out_file.empty() ? stdout : std::fopen(out_file.c_str(), "w");
    if (!out) throw ParseError("cannot open output file '" + out_file + "'");
    std::fprintf(out, "year,%s\n", filtered.name.c_str());
    for (std::size_t t = 0; t < filtered.years.size(); ++t)
        std::fprintf(out, "%d,%.10g\n", filtered.years[t], filtered.values[static_cast<int>(t)]);
    if (!out_file.empty()) std::fclose(out);
    return 0;
}

int cmd_mc_table(const std::string& test, int reps, const std::string& deltas,
                 const std::string& alphas, const std::string& rhos, bool no_bootstrap,
                 int kilian_reps, const CommonArgs& args) {
    TableRunConfig cfg;
    cfg.replications = reps;
    cfg.seed = args.seed;
    cfg.with_bootstrap = !no_bootstrap;
    cfg.kilian_replications = kilian_reps;
    cfg.search = args.search();
    TableResult table = run_table(parse_method(test), parse_double_list(deltas),
                                  parse_double_list(alphas), parse_double_list(rhos), cfg);
    std::fputs((args.format == "csv" ? to_csv(table) : to_text(table)).c_str(), stdout);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural-break estimation and testing for systems of joined segmented trends"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* estimate = app.add_subcommand("estimate", "estimate break dates for a system");
    std::vector<std::string> est_files;
    std::string est_breaks;
    estimate->add_option("files", est_files, "input CSV files")->required()->expected(-1);
    estimate->add_option("--breaks", est_breaks, "breaks per equation, e.g. 1,1");
    add_common(estimate, args);

    auto* common = app.add_subcommand("test-common", "test linear restrictions on break dates");
    std::vector<std::string> common_files;
    std::string common_breaks, common_method = "all", common_restriction = "common";
    bool common_pairwise = false;
    common->add_option("files", common_files, "input CSV files")->required()->expected(-1);
    common->add_option("--breaks", common_breaks, "breaks per equation (pairwise: per pair)");
    common->add_option("--method", common_method, "lr|gls-wald|ols-wald|all");
    common->add_option("--restriction", common_restriction, "common | fixed:<f,...> | offset:<c>");
    common->add_flag("--pairwise", common_pairwise, "pair file 1 with each remaining file");
    add_common(common, args);

    auto* extra = app.add_subcommand("test-extra", "test for one additional slope break");
    std::vector<std::string> extra_files;
    std::string extra_breaks;
    int extra_equation = 0;
    double extra_trim = 0.1;
    bool extra_pairwise = false;
    extra->add_option("files", extra_files, "input CSV files")->required()->expected(-1);
    extra->add_option("--breaks", extra_breaks, "base breaks per equation under the null");
    extra->add_option("--equation", extra_equation, "1-based equation to test (0 = all)");
    extra->add_option("--trim", extra_trim, "fractional trim for the candidate grid");
    extra->add_flag("--pairwise", extra_pairwise, "pair file 1 with each remaining file");
    add_common(extra, args);

    auto* filter = app.add_subcommand("filter", "remove natural-variability modes by BIC");
    std::string filter_temp, filter_out;
    std::vector<std::string> filter_modes;
    int filter_kmax = 4;
    filter->add_option("temperature", filter_temp, "temperature CSV")->required();
    filter->add_option("--modes", filter_modes, "mode CSV files")->required()->expected(-1);
    filter->add_option("--kmax", filter_kmax, "lag menu size (lags 0..kmax-1)");
    filter->add_option("--out", filter_out, "output CSV (default stdout)");
    add_common(filter, args);

    auto* mc = app.add_subcommand("mc-table", "size/power table on the bivariate design");
    std::string mc_test = "lr", mc_deltas = "0.5,1.0,1.5", mc_alphas = "0.0,0.3,0.7",
                mc_rhos = "-0.5,0.0,0.5";
    int mc_reps = 1000, mc_kilian = 200;
    bool mc_noboot = false;
    mc->add_option("--test", mc_test, "lr|gls-wald|ols-wald");
    mc->add_option("--reps", mc_reps, "Monte Carlo replications");
    mc->add_option("--deltas", mc_deltas, "slope-change grid");
    mc->add_option("--alphas", mc_alphas, "AR coefficient grid");
    mc->add_option("--rhos", mc_rhos, "cross-correlation grid");
    mc->add_flag("--no-bootstrap", mc_noboot, "skip the bootstrap columns");
    mc->add_option("--kilian-reps", mc_kilian, "inner bias-correction replications");
    add_common(mc, args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (estimate->parsed()) return cmd_estimate(est_files, est_breaks, args);
        if (common->parsed())
            return cmd_test_common(common_files, common_breaks, common_method, common_restriction,
                                   common_pairwise, args);
        if (extra->parsed())
            return cmd_test_extra(extra_files, extra_breaks,
                                  extra_equation > 0 ? std::optional<int>(extra_equation)
                                                     : std::nullopt,
                                  extra_trim, extra_pairwise, args);
        if (filter->parsed()) return cmd_filter(filter_temp, filter_modes, filter_kmax, filter_out, args);
        if (mc->parsed())
            return cmd_mc_table(mc_test, mc_reps, mc_deltas, mc_alphas, mc_rhos, mc_noboot,
                                mc_kilian, args);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
