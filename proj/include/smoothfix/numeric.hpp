#ifndef SMOOTHFIX_NUMERIC_HPP
#define SMOOTHFIX_NUMERIC_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace smoothfix::numeric {

/// Minimizer of a unimodal function on [lo, hi] by golden-section search.
double golden_minimize(const std::function<double(double)>& f, double lo, double hi,
                       double tol = 1e-10);

/// Root of f on [lo, hi]; requires sign change. Bisects to bracket width `xtol`.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double xtol = 1e-13);

/// Adaptive Simpson quadrature on [a, b].
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

/// Log-spaced grid with `n` points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t n);

} // namespace smoothfix::numeric

#endif
