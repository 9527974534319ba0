#pragma once

// Test-only adaptive quadrature oracle: independent of every closed form it
// checks. Integrands here are piecewise cubics with kinks at known
// breakpoints, so Simpson refinement between breakpoints converges fast.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testsupport {

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

/// Integral over [0,1] split at the supplied interior breakpoints.
inline double integrate01(const std::function<double(double)>& f, std::vector<double> breakpoints,
                          double tol = 1e-13) {
    breakpoints.push_back(0.0);
    breakpoints.push_back(1.0);
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        double a = std::max(0.0, breakpoints[i]);
        double b = std::min(1.0, breakpoints[i + 1]);
        if (b > a) total += integrate(f, a, b, tol);
    }
    return total;
}

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }
inline double indicator(double r, double lam) { return r > lam ? 1.0 : 0.0; }

}  // namespace testsupport
