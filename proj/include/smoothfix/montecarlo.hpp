#ifndef SMOOTHFIX_MONTECARLO_HPP
#define SMOOTHFIX_MONTECARLO_HPP

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "smoothfix/models.hpp"
#include "smoothfix/rng.hpp"

namespace smoothfix::mc {

/// Weighted sample representation of a distribution on [0, inf). Immutable
/// after construction; the sorted view is built lazily and shared.
class EmpiricalDist {
public:
    explicit EmpiricalDist(std::vector<double> samples, std::vector<double> weights = {});

    static EmpiricalDist point_mass(double c, std::size_t n);
    static EmpiricalDist exponential(double rate, std::size_t n, Rng& rng);

    const std::vector<double>& samples() const { return samples_; }
    bool weighted() const { return !weights_.empty(); }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return samples_.size(); }

    double mean() const;
    double moment(double p) const;
    double laplace(double s) const;             // E e^{-sX}
    std::complex<double> char_fn(double s) const; // E e^{isX}
    double tail(double x) const;                // P(X > x)
    double quantile(double q) const;

    const std::vector<double>& sorted() const;

    /// Every sample multiplied by c.
    EmpiricalDist scaled(double c) const;

    std::string lineage;            // seed provenance tag
    double truncation_bound = 0.0;  // expected discarded mass, when truncated

private:
    std::vector<double> samples_;
    std::vector<double> weights_; // empty = uniform; else sums to 1
    mutable std::shared_ptr<const std::vector<double>> sorted_;
};

// --------------------------------------------------------------------------
// weighted branching process and its additive martingale

struct BrwOptions {
    double gamma = 1.0;
    int generations = 12;
    std::uint64_t replicas = 10000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::uint64_t pop_cap = 10000000; // nodes per replica before censoring
    double tail_tol = 1e-9;
};

struct BrwResult {
    std::vector<double> samples; // uncensored replicas only
    int generations = 0;
    double gamma = 1.0;
    double norm = 1.0; // t(gamma)^n
    std::uint64_t censored = 0;
    EmpiricalDist dist() const { return EmpiricalDist(samples); }
};

/// Grows the weighted tree replica-by-replica and returns the generation-n
/// martingale samples sum_{|v|=n} prod(weights)^gamma / t(gamma)^n.
BrwResult simulate_brw_martingale(const models::WeightModel& model, const BrwOptions& opts = {});

// --------------------------------------------------------------------------
// spine perpetuity

struct SpineOptions {
    double beta = 1.0;
    int depth = 60;
    std::uint64_t replicas = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    double product_cutoff = 1e-12;
    models::NodeOptions node;
};

struct SpineResult {
    std::vector<double> v1, v2, v;
    int depth = 0;
    double cutoff_fraction = 0.0; // replicas stopped early by the product cutoff
    bool v1_mean_stable = false;  // partial means within 10% across doubling sizes
};

SpineResult simulate_spine_perpetuity(const models::WeightModel& model,
                                      const SpineOptions& opts = {});

// --------------------------------------------------------------------------
// population dynamics

struct StepOptions {
    std::uint64_t replicas = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    double tail_tol = 1e-9;
};

EmpiricalDist population_step(const models::WeightModel& model, const EmpiricalDist& pool,
                              const StepOptions& opts = {});

struct IterateOptions {
    std::uint64_t replicas = 100000;
    std::uint64_t iterations = 30;
    std::uint64_t seed = 1;
    int workers = 1;
    double tail_tol = 1e-9;
    bool track_ks = true;
    double collapse_ratio = 1e-6; // pool mean below ratio * initial aborts
};

struct IterateResult {
    EmpiricalDist pool;
    std::vector<double> ks_trace;   // consecutive-pool distances
    std::vector<double> mean_trace;
};

IterateResult iterate_population(const models::WeightModel& model, const EmpiricalDist& seed_pool,
                                 const IterateOptions& opts = {});

// --------------------------------------------------------------------------
// shot noise and transforms of samples

struct ShotNoiseOptions {
    std::uint64_t replicas = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    double tail_tol = 1e-9;
};

/// Draws shift + sum_i Y_i h(tau_i) with tau a rate-lambda Poisson flow
/// truncated at a certified horizon and Y_i resampled from the pool.
EmpiricalDist sample_shot_noise(const models::DecayProfile& h, double lambda,
                                const EmpiricalDist& pool, double shift,
                                const ShotNoiseOptions& opts = {});

/// Importance-resample proportional to x; output mean estimates E X^2 / E X.
EmpiricalDist size_bias(const EmpiricalDist& dist, Rng& rng, std::size_t out_size);

// --------------------------------------------------------------------------
// distances and reference laws

struct NamedLaw {
    enum class Kind { exponential, gamma, point_mass };
    Kind kind = Kind::exponential;
    double a = 1.0; // rate (exponential), shape (gamma), location (point mass)
    double b = 1.0; // rate (gamma)

    static NamedLaw exponential(double rate) { return {Kind::exponential, rate, 0.0}; }
    static NamedLaw gamma(double shape, double rate) { return {Kind::gamma, shape, rate}; }
    static NamedLaw point_mass(double c) { return {Kind::point_mass, c, 0.0}; }

    double cdf(double x) const;
    double cdf_left(double x) const; // limit from below, differs only for atoms
};

double ks_distance(const EmpiricalDist& a, const EmpiricalDist& b);
double ks_distance(const EmpiricalDist& a, const NamedLaw& law);

// --------------------------------------------------------------------------
// positive stable draws (Laplace transform e^{-s^alpha})

double positive_stable_draw(double alpha, Rng& rng);
EmpiricalDist sample_positive_stable(double alpha, std::size_t count, Rng& rng);

} // namespace smoothfix::mc

#endif
