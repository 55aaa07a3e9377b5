#ifndef SMOOTHFIX_MODELS_HPP
#define SMOOTHFIX_MODELS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smoothfix/estimate.hpp"
#include "smoothfix/rng.hpp"

namespace smoothfix::models {

struct Atom {
    double value = 0.0;
    double prob = 0.0;
};

/// Count distribution on {1, 2, ...}, either a finite atom list or geometric
/// with P(L = k) = (1-q) q^{k-1}.
class CountDist {
public:
    enum class Kind { atoms, geometric };

    static CountDist from_atoms(std::vector<Atom> atoms);
    static CountDist geometric(double q);

    Kind kind() const { return kind_; }
    double q() const { return q_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    double mean() const;
    double moment(double p) const; // E L^p
    double pgf(double z) const;    // E z^L,  |z| <= 1
    double pgf_derivative(double z) const;
    std::uint64_t sample(Rng& rng) const;
    std::uint64_t sample_size_biased(Rng& rng) const; // P(k) proportional to k P(L = k)

private:
    Kind kind_ = Kind::atoms;
    std::vector<Atom> atoms_;
    double q_ = 0.0;
};

/// Nonincreasing right-continuous decay profile h: (0,inf) -> [0,inf) with a
/// finite integral. Two concrete shapes: exponential e^{-rate t}, and a
/// piecewise-constant step function (value levels[i] on [edges[i-1], edges[i]),
/// zero beyond the last edge). Step profiles keep all integrals exact.
class DecayProfile {
public:
    enum class Kind { exponential, step };

    static DecayProfile exponential(double rate);
    static DecayProfile step(std::vector<double> edges, std::vector<double> levels);

    Kind kind() const { return kind_; }
    double rate() const { return rate_; }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& levels() const { return levels_; }

    double operator()(double t) const;

    /// Generalized inverse: inf{u : h(u) < z}, zero for z >= h(0+).
    double inverse(double z) const;

    double integral() const;               // int_0^inf h
    double tail_integral(double T) const;  // int_T^inf h
    double power_integral(double beta) const;     // int_0^inf h^beta
    double power_log_integral(double beta) const; // int_0^inf h^beta log h

    /// Smallest T with tail_integral(T) <= budget. Throws horizon_unbounded if
    /// no such T exists below max_horizon.
    double horizon(double budget, double max_horizon = 1e6) const;

    /// Draw from the density h(t)^beta / int h^beta on (0, horizon-free) support.
    double sample_power_density(double beta, Rng& rng) const;

private:
    Kind kind_ = Kind::exponential;
    double rate_ = 1.0;
    std::vector<double> edges_;
    std::vector<double> levels_;
};

/// One realization of the point process, largest weight first. For truncated
/// infinite models, truncation_bound bounds the expected discarded tail sum.
struct PointSample {
    std::vector<double> weights;
    double truncation_bound = 0.0;
};

/// The four weight-model kinds. All carry closed-form moment functionals, so
/// t(beta), its derivative and sum moments evaluate exactly; Monte Carlo paths
/// exist alongside for cross-checking.
class WeightModel {
public:
    enum class Kind { fixed_weights, common_random_weight, random_count_fixed_weight, shot_noise };

    static WeightModel fixed_weights(std::vector<double> weights);
    static WeightModel common_random_weight(std::uint64_t count, std::vector<Atom> atoms);
    static WeightModel random_count_fixed_weight(CountDist count, double weight);
    static WeightModel shot_noise(DecayProfile h, double intensity);

    Kind kind() const { return kind_; }
    const std::vector<double>& weights() const { return weights_; }
    std::uint64_t count() const { return count_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const CountDist& count_dist() const { return count_dist_; }
    double weight_value() const { return weight_value_; }
    const DecayProfile& profile() const { return profile_; }
    double intensity() const { return intensity_; }

    /// Declared lattice span of log-weights, when the model is arithmetic.
    std::optional<double> lattice_span;

    std::string describe() const;

private:
    WeightModel() = default;
    Kind kind_ = Kind::fixed_weights;
    std::vector<double> weights_;          // fixed_weights
    std::uint64_t count_ = 0;              // common_random_weight
    std::vector<Atom> atoms_;              // common_random_weight
    CountDist count_dist_;                 // random_count_fixed_weight
    double weight_value_ = 0.0;            // random_count_fixed_weight
    DecayProfile profile_ = DecayProfile::exponential(1.0); // shot_noise
    double intensity_ = 1.0;               // shot_noise
};

struct McOptions {
    std::uint64_t budget = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    double tail_tol = 1e-9;
    bool force_mc = false; // skip closed forms, exercise the sampling path
};

/// Rejects degenerate models: all weights a.s. in {0,1}, or E L <= 1.
void validate_model(const WeightModel& model);

PointSample sample_points(const WeightModel& model, Rng& rng, double tail_tol = 1e-9,
                          double max_horizon = 1e6);

/// t(beta) = E sum_i X_i^beta.
Estimate t_beta(const WeightModel& model, double beta, const McOptions& opts = {});

/// d/dbeta t(beta) = E sum_i X_i^beta log X_i.
Estimate t_beta_derivative(const WeightModel& model, double beta, const McOptions& opts = {});

/// E (sum_i X_i)^p for p >= 1.
Estimate sum_weights_moment(const WeightModel& model, double p, const McOptions& opts = {});

/// True when |t(beta) - 1| is within tolerance (1e-6 exact, 3 SE sampled).
bool condition_d_holds(const WeightModel& model, double beta, const McOptions& opts = {});
void require_condition_d(const WeightModel& model, double beta, const McOptions& opts = {});

struct SizeBiasedNode {
    double m = 0.0; // selected weight raised to beta
    double n = 0.0; // sum of X_i^beta over the size-biased realization
};

struct NodeOptions {
    std::uint64_t pool = 1024; // pool size for the resampling fallback
    bool force_pool = false;   // disable per-kind exact samplers
    double tail_tol = 1e-9;
    bool skip_condition_check = false;
};

/// One spine node under the size-biased change of measure: a realization drawn
/// with probability proportional to sum X_i^beta, then a point within it with
/// probability X_i^beta / sum X_j^beta. Exact per-kind samplers are used where
/// the model structure allows; otherwise self-normalized pool resampling.
SizeBiasedNode sample_size_biased_node(const WeightModel& model, double beta, Rng& rng,
                                       const NodeOptions& opts = {});

} // namespace smoothfix::models

#endif
