#include "smoothfix/tails.hpp"

#include <algorithm>
#include <cmath>

#include "smoothfix/errors.hpp"
#include "smoothfix/numeric.hpp"
#include "smoothfix/parallel.hpp"

namespace smoothfix::tails {

MomentReport check_moment_condition(const models::WeightModel& model, double p,
                                    const models::McOptions& opts) {
    if (!(p > 1.0)) raise(Errc::bad_input, "moment condition needs p > 1");
    models::validate_model(model);
    MomentReport rep;
    rep.p = p;
    rep.weight_moment = models::t_beta(model, p, opts);
    rep.sum_moment = models::sum_weights_moment(model, p, opts);
    double slack = rep.weight_moment.provenance == Provenance::exact
                       ? 1e-9
                       : 3.0 * rep.weight_moment.std_error;
    bool tp_below_one = rep.weight_moment.value < 1.0 - slack;
    bool sum_finite = std::isfinite(rep.sum_moment.value);
    rep.verdict = tp_below_one && sum_finite;
    rep.lp_convergence = rep.verdict && models::condition_d_holds(model, 1.0, opts);
    return rep;
}

double tail_root_b(const models::WeightModel& model, double b_max) {
    models::validate_model(model);
    models::require_condition_d(model, 1.0);
    auto t = [&](double b) { return models::t_beta(model, b).value; };
    double xmin = numeric::golden_minimize(t, 1.0, b_max, 1e-12);
    if (!(t(xmin) < 1.0 - 1e-13) || !(t(b_max) >= 1.0))
        raise(Errc::no_root, "t(beta) has no root above 1 in the search range");
    double b = numeric::bisect_root([&](double x) { return t(x) - 1.0; }, xmin, b_max);
    if (!(b > 1.0 + 1e-9)) raise(Errc::no_root, "only the unit root was found");
    return b;
}

HillEstimate hill_estimate(const mc::EmpiricalDist& dist, double k_fraction) {
    if (!(k_fraction > 0.0 && k_fraction <= 0.2)) raise(Errc::bad_input, "k_fraction out of range");
    const auto& xs = dist.sorted();
    std::size_t n = xs.size();
    if (n < 10000) raise(Errc::too_few_samples, "Hill estimation needs at least 1e4 samples");
    std::size_t k = static_cast<std::size_t>(k_fraction * static_cast<double>(n));
    if (k < 10) k = 10;
    double pivot = xs[n - 1 - k];
    if (!(pivot > 0.0)) raise(Errc::too_few_samples, "nonpositive order statistic at the pivot");
    double h = 0.0;
    for (std::size_t i = 0; i < k; ++i) h += std::log(xs[n - 1 - i] / pivot);
    h /= static_cast<double>(k);
    HillEstimate est;
    est.k = k;
    est.index = 1.0 / h;
    double half = 1.96 * est.index / std::sqrt(static_cast<double>(k));
    est.lo = est.index - half;
    est.hi = est.index + half;
    return est;
}

// ---------------------------------------------------------------------------
// tail constant

namespace {

// Partial power integrals of the empirical tail: int_0^T y^beta mu(y,inf) dy
// = (1/n) sum min(x_i, T)^{beta+1} / (beta+1), exact over the sample.
struct MuIntegral {
    const std::vector<double>& sorted;
    std::vector<double> logs; // running sums for the shot-noise kernel

    explicit MuIntegral(const mc::EmpiricalDist& d) : sorted(d.sorted()) {}

    double tail(double y) const {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), y);
        return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
    }

    double integral(double beta, double T) const {
        auto it = std::upper_bound(sorted.begin(), sorted.end(), T);
        std::size_t k = static_cast<std::size_t>(it - sorted.begin()); // x[0..k) <= T
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += std::pow(sorted[i], beta + 1.0);
        s += static_cast<double>(sorted.size() - k) * std::pow(T, beta + 1.0);
        return s / (static_cast<double>(sorted.size()) * (beta + 1.0));
    }
};

// The law of the spine weight B: atoms for the finite-structure kinds and the
// exponential shot-noise closed form (B uniform scaled by lambda/rate).
struct SpineWeightLaw {
    std::vector<models::Atom> atoms; // empty means the uniform kernel applies
    double uniform_factor = 0.0;     // lambda / rate for exponential profiles

    static SpineWeightLaw of(const models::WeightModel& model) {
        using K = models::WeightModel::Kind;
        SpineWeightLaw law;
        switch (model.kind()) {
            case K::fixed_weights: {
                double total = 0.0;
                for (double w : model.weights()) total += w;
                for (double w : model.weights()) law.atoms.push_back({w, w / total});
                break;
            }
            case K::common_random_weight:
                for (const auto& a : model.atoms())
                    law.atoms.push_back({a.value, static_cast<double>(model.count()) * a.prob * a.value});
                break;
            case K::random_count_fixed_weight:
                law.atoms.push_back({model.weight_value(), 1.0});
                break;
            case K::shot_noise: {
                const auto& h = model.profile();
                if (h.kind() == models::DecayProfile::Kind::step) {
                    double lo = 0.0;
                    for (std::size_t i = 0; i < h.edges().size(); ++i) {
                        law.atoms.push_back(
                            {h.levels()[i], model.intensity() * h.levels()[i] * (h.edges()[i] - lo)});
                        lo = h.edges()[i];
                    }
                } else {
                    law.uniform_factor = model.intensity() / h.rate();
                }
                break;
            }
        }
        return law;
    }
};

// N(y,inf) = E[(B Wbar)^{-1}; B Wbar > y] with Wbar size-biased from the pool.
// Integrating the resampling out analytically gives a mixture of rescaled
// empirical tails: N(y) = (1/m) E_B[(1/B) mu(y/B, inf)]; for the uniform B of
// exponential shot noise the mixture collapses to (f/m n) sum_{x>y} log(x/y).
struct NTail {
    SpineWeightLaw law;
    const MuIntegral& mu;
    double mean;
    std::vector<double> suffix_log; // suffix sums of log x for the uniform kernel

    NTail(SpineWeightLaw l, const MuIntegral& m, double mn) : law(std::move(l)), mu(m), mean(mn) {
        if (law.atoms.empty()) {
            const auto& xs = mu.sorted;
            suffix_log.assign(xs.size() + 1, 0.0);
            for (std::size_t i = xs.size(); i-- > 0;)
                suffix_log[i] = suffix_log[i + 1] + std::log(xs[i]);
        }
    }

    double tail(double y) const {
        if (law.atoms.empty()) {
            const auto& xs = mu.sorted;
            auto it = std::upper_bound(xs.begin(), xs.end(), y);
            std::size_t k = static_cast<std::size_t>(it - xs.begin());
            double s = suffix_log[k] - static_cast<double>(xs.size() - k) * std::log(y);
            return law.uniform_factor * s / (mean * static_cast<double>(xs.size()));
        }
        double s = 0.0;
        for (const auto& a : law.atoms) s += a.prob / a.value * mu.tail(y / a.value);
        return s / mean;
    }

    // int_0^T y^beta N(y,inf) dy
    double integral(double beta, double T) const {
        if (law.atoms.empty()) {
            // int_0^min(x,T) y^beta log(x/y) dy has a closed form per sample
            const auto& xs = mu.sorted;
            double bp = beta + 1.0;
            double s = 0.0;
            for (double x : xs) {
                double c = std::min(x, T);
                s += std::pow(c, bp) / bp * (std::log(x / c) + 1.0 / bp);
            }
            return law.uniform_factor * s / (mean * static_cast<double>(xs.size()));
        }
        double s = 0.0;
        for (const auto& a : law.atoms)
            s += a.prob * std::pow(a.value, beta) * mu.integral(beta, T / a.value);
        return s / mean;
    }
};

} // namespace

Plateau plateau_check(const mc::EmpiricalDist& dist, double b, double q_hi) {
    double x_hi = dist.quantile(q_hi);
    Plateau pl;
    pl.at_low = std::pow(x_hi / 4.0, b) * dist.tail(x_hi / 4.0);
    pl.at_high = std::pow(x_hi / 2.0, b) * dist.tail(x_hi / 2.0);
    double scale = std::max(std::fabs(pl.at_low), std::fabs(pl.at_high));
    pl.spread = scale > 0.0 ? std::fabs(pl.at_high - pl.at_low) / scale : 0.0;
    return pl;
}

TailReport compute_cb(const models::WeightModel& model, const mc::EmpiricalDist& fixed_point,
                      double b, const CbOptions& opts) {
    models::validate_model(model);
    if (!models::condition_d_holds(model, 1.0) || !models::condition_d_holds(model, b))
        raise(Errc::hypotheses_violated, "needs t(1) = t(b) = 1");
    double sum_b = models::sum_weights_moment(model, b).value;
    if (!std::isfinite(sum_b)) raise(Errc::hypotheses_violated, "E (sum X)^b must be finite");
    double denom = models::t_beta_derivative(model, b).value;
    if (!(denom > 0.0)) raise(Errc::hypotheses_violated, "E sum X^b log X must be positive");

    TailReport rep;
    rep.b = b;
    rep.denominator = denom;
    rep.lattice_span = model.lattice_span;
    rep.tail_case = model.lattice_span ? TailCase::arithmetic : TailCase::nonarithmetic;

    MuIntegral mu(fixed_point);
    double mean = fixed_point.mean();
    NTail ntail{SpineWeightLaw::of(model), mu, mean};

    // optional paired-draw estimator of the N tail, for cross-validation
    std::vector<double> paired;
    if (opts.force_paired) {
        const auto& xs = fixed_point.samples();
        std::vector<double> cum(xs.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            acc += xs[i];
            cum[i] = acc;
        }
        models::NodeOptions node;
        node.skip_condition_check = true;
        paired.resize(opts.paired_draws);
        parallel_for(opts.paired_draws, opts.workers, [&](std::size_t j) {
            Rng rng = Rng::for_replica(opts.seed, j);
            double bdraw = models::sample_size_biased_node(model, 1.0, rng, node).m;
            double u = rng.uniform() * acc;
            auto it = std::lower_bound(cum.begin(), cum.end(), u);
            paired[j] = bdraw * xs[static_cast<std::size_t>(it - cum.begin())];
        });
        std::sort(paired.begin(), paired.end());
    }
    auto paired_tail = [&](double y) {
        auto it = std::upper_bound(paired.begin(), paired.end(), y);
        double s = 0.0;
        for (auto p = it; p != paired.end(); ++p) s += 1.0 / *p;
        return s / static_cast<double>(paired.size());
    };

    double y_lo = fixed_point.quantile(opts.q_lo);
    double y_hi = fixed_point.quantile(opts.q_hi);
    if (!(y_lo > 0.0)) y_lo = 1e-6 * y_hi;
    rep.grid = numeric::log_grid(y_lo, y_hi, opts.grid_points);
    rep.mu_tail.resize(rep.grid.size());
    rep.n_tail.resize(rep.grid.size());
    double n_fp = static_cast<double>(fixed_point.size());
    std::size_t flips = 0;
    double prev_sign = 0.0;
    double worst = 0.0;
    double decade_lo = y_hi / 10.0;
    std::vector<double> plateau_vals;
    for (std::size_t i = 0; i < rep.grid.size(); ++i) {
        double y = rep.grid[i];
        rep.mu_tail[i] = mu.tail(y);
        rep.n_tail[i] = opts.force_paired ? paired_tail(y) : ntail.tail(y);
        double diff = rep.mu_tail[i] - rep.n_tail[i];
        double sign = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        if (sign != 0.0 && prev_sign != 0.0 && sign != prev_sign) ++flips;
        if (sign != 0.0) prev_sign = sign;
        if (y >= decade_lo) {
            double se_mu = std::sqrt(std::max(rep.mu_tail[i] * (1.0 - rep.mu_tail[i]), 0.0) / n_fp);
            worst = std::max(worst, rep.n_tail[i] - rep.mu_tail[i] - 2.0 * se_mu);
            plateau_vals.push_back(std::pow(y, b) * rep.mu_tail[i]);
        }
    }
    rep.dominance_violation = std::max(worst, 0.0);
    rep.noisy_difference =
        static_cast<double>(flips) > opts.sign_flip_alert * static_cast<double>(rep.grid.size());

    if (!plateau_vals.empty()) {
        std::sort(plateau_vals.begin(), plateau_vals.end());
        rep.cb_empirical = plateau_vals[plateau_vals.size() / 2];
    }

    // exact head below the grid, trapezoid across it
    auto truncated_integral = [&](double beta, double T) {
        double head = mu.integral(beta, y_lo) - ntail.integral(beta, y_lo);
        double acc2 = head;
        for (std::size_t i = 0; i + 1 < rep.grid.size() && rep.grid[i] < T; ++i) {
            double hi = std::min(rep.grid[i + 1], T);
            double f0 = std::pow(rep.grid[i], beta) * (rep.mu_tail[i] - rep.n_tail[i]);
            double f1 = std::pow(hi, beta) * (rep.mu_tail[i + 1] - rep.n_tail[i + 1]);
            acc2 += 0.5 * (f0 + f1) * (hi - rep.grid[i]);
        }
        return acc2;
    };

    if (rep.tail_case == TailCase::nonarithmetic) {
        rep.cb_formula = truncated_integral(b - 1.0, y_hi) / denom;
    } else {
        double span = *model.lattice_span;
        int k_lo = static_cast<int>(std::floor(std::log(y_lo) / span)) - 8;
        int k_hi = static_cast<int>(std::ceil(std::log(y_hi) / span));
        double total = 0.0;
        bool truncated_early = false;
        for (int k = k_lo; k <= k_hi; ++k) {
            double t1 = std::exp(span * k);
            double prefix = mu.integral(b, std::min(t1, y_hi)) - ntail.integral(b, std::min(t1, y_hi));
            double term = std::exp(-span * k) * prefix;
            total += term;
            if (k > k_lo + 4 && std::fabs(term) < opts.lattice_term_tol * std::fabs(total)) {
                truncated_early = true;
                break;
            }
        }
        if (!truncated_early) {
            // beyond the sample range the prefix integral is constant; the
            // remaining terms form a geometric series
            double f_max = mu.integral(b, y_hi) - ntail.integral(b, y_hi);
            double q = std::exp(-span);
            total += f_max * std::pow(q, k_hi + 1) / (1.0 - q);
        }
        rep.cb_formula = total * span / denom;
    }
    return rep;
}

} // namespace smoothfix::tails
