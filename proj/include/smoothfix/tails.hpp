#ifndef SMOOTHFIX_TAILS_HPP
#define SMOOTHFIX_TAILS_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "smoothfix/estimate.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/montecarlo.hpp"

namespace smoothfix::tails {

struct MomentReport {
    double p = 0.0;
    Estimate sum_moment;    // E (sum X)^p
    Estimate weight_moment; // t(p)
    bool verdict = false;   // E W^p finite
    bool lp_convergence = false;
};

/// Both halves of the moment criterion: E (sum X)^p < inf and t(p) < 1.
MomentReport check_moment_condition(const models::WeightModel& model, double p,
                                    const models::McOptions& opts = {});

/// The root of t(beta) = 1 on (1, b_max]; requires the unit-mean normalization.
double tail_root_b(const models::WeightModel& model, double b_max = 8.0);

struct HillEstimate {
    double index = 0.0;
    double lo = 0.0, hi = 0.0; // 95% interval
    std::size_t k = 0;
};

HillEstimate hill_estimate(const mc::EmpiricalDist& dist, double k_fraction);

enum class TailCase { nonarithmetic, arithmetic };

struct CbOptions {
    // The N tail defaults to the closed-form mixture over the spine-weight law
    // with the size-biased resampling integrated out; force_paired switches to
    // raw (B, size-biased W) pair sampling for cross-validation.
    bool force_paired = false;
    std::uint64_t paired_draws = 1000000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::size_t grid_points = 400;
    double q_lo = 0.01, q_hi = 0.9999; // quantile span of the integration grid
    double lattice_term_tol = 1e-6;    // truncation of the arithmetic lattice sum
    double sign_flip_alert = 0.25;     // fraction of noisy grid points that flags the result
};

struct TailReport {
    double b = 0.0;
    HillEstimate hill;
    double cb_formula = 0.0;
    double cb_empirical = 0.0;
    double denominator = 0.0; // E sum X^b log X
    TailCase tail_case = TailCase::nonarithmetic;
    std::optional<double> lattice_span;
    bool noisy_difference = false;
    double dominance_violation = 0.0; // worst (N - mu - 2 SE)^+ over the check grid
    std::vector<double> grid, mu_tail, n_tail; // diagnostics for the integrand
};

/// The tail constant: integrates y^{b-1} (mu(y,inf) - N(y,inf)) with the N
/// tail estimated from paired spine/size-biased draws, divided by the exact
/// log-moment. Also reports the plateau estimate x^b mu(x,inf).
TailReport compute_cb(const models::WeightModel& model, const mc::EmpiricalDist& fixed_point,
                      double b, const CbOptions& opts = {});

/// Plateau diagnostic: x^b * empirical tail at two thresholds an octave apart
/// inside the top decade below the q_hi quantile.
struct Plateau {
    double at_low = 0.0;
    double at_high = 0.0;
    double spread = 0.0; // relative disagreement
};
Plateau plateau_check(const mc::EmpiricalDist& dist, double b, double q_hi = 0.9999);

} // namespace smoothfix::tails

#endif
