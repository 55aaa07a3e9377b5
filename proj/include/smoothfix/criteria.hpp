#ifndef SMOOTHFIX_CRITERIA_HPP
#define SMOOTHFIX_CRITERIA_HPP

#include <functional>
#include <optional>
#include <vector>

#include "smoothfix/estimate.hpp"
#include "smoothfix/lst.hpp"
#include "smoothfix/models.hpp"

namespace smoothfix::criteria {

struct BetaRoots {
    std::vector<double> roots;     // at most two, ascending
    std::vector<double> residuals; // |t(root) - 1|
    double search_lo = 0.0;
    double search_hi = 0.0;
    bool tangent = false; // double root: t touches 1 at its minimizer
};

/// All solutions of t(beta) = 1 on (lo, search_max], found by locating the
/// convex minimizer and bisecting each flank. Roots closer than 1e-9 merge.
BetaRoots solve_beta_roots(const models::WeightModel& model, double search_max = 8.0);

enum class Drift { negative, oscillating, positive, inconclusive };

const char* drift_name(Drift d);

struct DriftClass {
    Drift verdict = Drift::inconclusive;
    double mean_log = 0.0; // may be +-infinity when a one-sided mean diverges
    double mean_std_error = 0.0;
    bool mean_exact = false;
    std::optional<double> erickson; // Kesten-Maller statistic when both tails are heavy
};

using Sampler = std::function<double(Rng&)>;

struct DriftOptions {
    std::uint64_t budget = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    std::optional<double> exact_mean; // closed-form E R when available
    double heavy_ratio = 1.25;        // partial-mean growth that flags a heavy tail
    double zero_band = 3.0;           // |mean| within band * SE classifies as oscillating
};

/// Classifies the random walk with step law given by the sampler. Finite-mean
/// verdicts follow the sign of the mean; heavy one-sided tails switch to the
/// Kesten-Maller statistic, whose stabilization decides negative drift.
DriftClass classify_drift(const Sampler& logstep, const DriftOptions& opts = {});

struct IrEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool finite = false; // stabilization verdict, not a proof
};

struct IrOptions {
    std::uint64_t r_budget = 100000;
    std::uint64_t seed = 1;
    std::function<double(double)> exact_tail; // y >= 0 -> P(R <= -y), when known
};

/// I_R(sigma) = int_(1,inf) log x / int_0^{log x} P(R <= -y) dy sigma(dx),
/// with the inner tail integral taken against the empirical (or exact) law of R.
IrEstimate compute_ir(const Sampler& logstep, const std::vector<double>& sigma_samples,
                      const IrOptions& opts = {});
IrEstimate compute_ir(const std::vector<double>& r_samples, const std::vector<double>& sigma_samples,
                      const std::function<double(double)>& exact_tail = nullptr);

struct VerdictOptions {
    double search_max = 8.0;
    std::uint64_t budget = 100000;
    std::uint64_t seed = 1;
    int workers = 1;
    models::NodeOptions node;
};

struct CriteriaReport {
    BetaRoots beta_roots;
    DriftClass drift;
    IrEstimate i_r_sigma;
    std::optional<IrEstimate> i_r_chi; // evaluated when both one-sided means diverge
    std::optional<Estimate> xlogx;     // evaluated when the drift mean is finite
    char condition_case = '-';          // which moment regime applies: 'a', 'b', 'c', or none
    bool exists = false;
    std::optional<double> alpha;
};

/// Full existence check: roots, drift of the spine log-step at the smallest
/// root, and the integral test against the size-biased sum law.
CriteriaReport existence_verdict(const models::WeightModel& model,
                                const VerdictOptions& opts = {});

struct RegVarFit {
    double exponent = 0.0;
    double max_residual = 0.0; // worst per-point exponent deviation from the fit
    double deviation = 0.0;    // |exponent - beta_expected|
};

/// Fits the exponent in (1 - phi(sz)) / (1 - phi(s)) ~ z^beta over z in
/// {2,4,8} at the ten smallest grid arguments.
RegVarFit check_regular_variation(const lst::LstGrid& g, double beta_expected);

} // namespace smoothfix::criteria

#endif
