#ifndef SMOOTHFIX_LST_HPP
#define SMOOTHFIX_LST_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "smoothfix/models.hpp"
#include "smoothfix/montecarlo.hpp"

namespace smoothfix::lst {

struct GridSpec {
    double s_min = 1e-6;
    double s_max = 1e3;
    std::size_t points = 200;
    std::vector<double> make() const;
};

/// Fitted small-argument power law 1 - phi(s) ~ m s^alpha.
struct AlphaM {
    double alpha = 1.0;
    double m = 1.0;
    double residual = 0.0;
};

/// A Laplace-Stieltjes transform tabulated on an ascending log-spaced grid.
/// Between nodes it interpolates linearly in (log s, log(1-phi)); below the
/// grid it extrapolates by the fitted power law, above it holds the last
/// value. A grid may carry an analytic evaluator (exact closed form) and/or
/// the samples it was estimated from.
class LstGrid {
public:
    LstGrid(std::vector<double> args, std::vector<double> values);

    static LstGrid from_function(const std::function<double(double)>& phi,
                                 const GridSpec& spec = {});
    static LstGrid from_samples(const mc::EmpiricalDist& dist, const GridSpec& spec = {});
    static LstGrid point_mass(double m, const GridSpec& spec = {});

    const std::vector<double>& args() const { return s_; }
    const std::vector<double>& values() const { return phi_; }
    const AlphaM& extrapolation() const { return extrap_; }

    double operator()(double s) const;

    bool has_analytic() const { return static_cast<bool>(analytic_); }
    const std::function<double(double)>& analytic() const { return analytic_; }
    void set_analytic(std::function<double(double)> f) { analytic_ = std::move(f); }

    bool has_samples() const { return static_cast<bool>(backing_); }
    const mc::EmpiricalDist& backing_samples() const;
    void set_backing(std::shared_ptr<const mc::EmpiricalDist> d) { backing_ = std::move(d); }
    std::shared_ptr<const mc::EmpiricalDist> backing_ptr() const { return backing_; }

private:
    std::vector<double> s_, phi_;
    AlphaM extrap_;
    std::function<double(double)> analytic_;
    std::shared_ptr<const mc::EmpiricalDist> backing_;
};

/// Nonincreasing values, discrete convexity in s, and phi(0+) ~ 1; throws on
/// violation beyond small tolerances.
void check_shape(const LstGrid& g);

/// Least-squares power-law fit of 1 - phi over the ten smallest arguments.
AlphaM estimate_alpha_m(const LstGrid& g);

struct PicardOptions {
    std::uint64_t mc_budget = 10000;
    std::uint64_t seed = 1;
    int workers = 1;
    bool force_mc = false;   // sample realizations even when a closed form exists
    double quad_tol = 1e-10; // shot-noise exponent integral tolerance
    double tail_tol = 1e-9;
};

/// One application of the transform on the grid: phi'(s) = E prod phi(X_i s).
/// Finite-structure models evaluate the conditional expectation in closed
/// form; shot-noise models use the exact Poisson exponential formula.
LstGrid picard_step(const LstGrid& g, const models::WeightModel& model,
                    const PicardOptions& opts = {});

struct IterateLstOptions {
    std::uint64_t max_iter = 500;
    double tol = 1e-9;
    PicardOptions step;
};

struct PicardIteration {
    LstGrid grid;
    bool converged = false;
    std::uint64_t iterations = 0;
    std::vector<double> sup_trace; // sup-grid change per iteration
};

PicardIteration picard_iterate(const LstGrid& seed, const models::WeightModel& model,
                               const IterateLstOptions& opts = {});

struct RDeltaOptions {
    double s_min = 1e-6;
    double s_max = 1e4;
    std::size_t points = 400;
    double mean_tol = 1e-6;
};

struct RDelta {
    double value = 0.0;
    double tail_bound = 0.0; // truncation estimate outside the integration range
};

/// Baringhaus-Gruebel minimal metric: int s^{-delta-1} |cf_a - cf_b| ds for
/// delta in (1,2), over equal-mean distributions.
RDelta r_delta_distance(const mc::EmpiricalDist& a, const mc::EmpiricalDist& b, double delta,
                        const RDeltaOptions& opts = {});

struct ContractionOptions {
    std::uint64_t replicas = 20000;
    std::uint64_t seed = 1;
    int workers = 1;
    RDeltaOptions metric;
};

/// Measured r_p(T nu1, T nu2) / r_p(nu1, nu2) after one common-noise
/// population step; bounded by t(p) up to sampling slack.
double contraction_ratio(const models::WeightModel& model, const mc::EmpiricalDist& nu1,
                         const mc::EmpiricalDist& nu2, double p,
                         const ContractionOptions& opts = {});

/// phi_alpha(s) = phi(s^alpha); grid arguments are remapped exactly.
LstGrid stable_transform(const LstGrid& g, double alpha);

/// Sample-level mixing T^{1/alpha} S_alpha with S_alpha positive stable.
mc::EmpiricalDist stable_transform(const mc::EmpiricalDist& base, double alpha, Rng& rng);

/// psi(s) = phi(s^{1/alpha}); exact inverse of stable_transform on grids.
LstGrid inverse_stable_transform(const LstGrid& g, double alpha);

} // namespace smoothfix::lst

#endif
