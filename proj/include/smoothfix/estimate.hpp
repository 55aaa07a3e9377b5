#ifndef SMOOTHFIX_ESTIMATE_HPP
#define SMOOTHFIX_ESTIMATE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace smoothfix {

enum class Provenance { exact, monte_carlo, quadrature };

const char* provenance_name(Provenance p);

/// A numeric result that knows where it came from. `bound` carries a
/// deterministic error term (truncation, quadrature tolerance) on top of the
/// statistical std_error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    Provenance provenance = Provenance::exact;
    double bound = 0.0;

    static Estimate exact(double v) { return {v, 0.0, Provenance::exact, 0.0}; }
    static Estimate quadrature(double v, double b) { return {v, 0.0, Provenance::quadrature, b}; }

    static Estimate from_samples(const std::vector<double>& xs) {
        double m = 0.0;
        for (double x : xs) m += x;
        m /= static_cast<double>(xs.size());
        double v = 0.0;
        for (double x : xs) v += (x - m) * (x - m);
        std::size_t n = xs.size();
        double se = n > 1 ? std::sqrt(v / (static_cast<double>(n) * (n - 1.0))) : 0.0;
        return {m, se, Provenance::monte_carlo, 0.0};
    }
};

} // namespace smoothfix

#endif
