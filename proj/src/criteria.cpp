#include "smoothfix/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smoothfix/errors.hpp"
#include "smoothfix/numeric.hpp"
#include "smoothfix/parallel.hpp"

namespace smoothfix::criteria {

namespace {
constexpr double kRootMergeTol = 1e-9;
constexpr double kSearchLo = 1e-3;
} // namespace

// ---------------------------------------------------------------------------
// roots of t(beta) = 1

BetaRoots solve_beta_roots(const models::WeightModel& model, double search_max) {
    models::validate_model(model);
    if (!(search_max > kSearchLo)) raise(Errc::bad_input, "search_max too small");
    auto t = [&](double b) { return models::t_beta(model, b).value; };

    BetaRoots out;
    out.search_lo = kSearchLo;
    out.search_hi = search_max;

    double xmin = numeric::golden_minimize(t, kSearchLo, search_max, 1e-12);
    double tmin = t(xmin);
    if (tmin > 1.0 + 1e-12) raise(Errc::no_root, "t(beta) > 1 on the whole search interval");

    auto f = [&](double b) { return t(b) - 1.0; };
    if (std::fabs(tmin - 1.0) <= 1e-12) {
        out.roots.push_back(xmin); // tangency: double root at the minimizer
        out.tangent = true;
    } else {
        if (f(kSearchLo) >= 0.0) out.roots.push_back(numeric::bisect_root(f, kSearchLo, xmin));
        if (f(search_max) >= 0.0) out.roots.push_back(numeric::bisect_root(f, xmin, search_max));
        if (out.roots.empty()) raise(Errc::no_root, "t(beta) < 1 on the whole search interval");
    }
    std::sort(out.roots.begin(), out.roots.end());
    if (out.roots.size() == 2 && out.roots[1] - out.roots[0] < kRootMergeTol)
        out.roots.pop_back();
    for (double r : out.roots) out.residuals.push_back(std::fabs(t(r) - 1.0));
    return out;
}

// ---------------------------------------------------------------------------
// drift classification

const char* drift_name(Drift d) {
    switch (d) {
        case Drift::negative: return "NegativeDrift";
        case Drift::oscillating: return "Oscillating";
        case Drift::positive: return "PositiveDrift";
        case Drift::inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

double prefix_mean(const std::vector<double>& xs, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += xs[i];
    return s / static_cast<double>(n);
}

bool heavy_partial_means(const std::vector<double>& part, double ratio) {
    // part = one-sided values in sampling order
    std::size_t n = part.size();
    double m1 = prefix_mean(part, n / 4);
    double m2 = prefix_mean(part, n / 2);
    double m3 = prefix_mean(part, n);
    if (!(m3 > 0.0)) return false;
    return m2 > ratio * std::max(m1, 1e-300) || m3 > ratio * std::max(m2, 1e-300);
}

// int_0^u of the empirical tail P(R <= -y), via sorted Z = (-R)^+ prefix sums
struct TailIntegral {
    std::vector<double> z;      // ascending
    std::vector<double> prefix; // prefix[i] = sum of z[0..i)
    double n = 0.0;

    explicit TailIntegral(const std::vector<double>& r) {
        z.reserve(r.size());
        for (double x : r)
            if (x < 0.0) z.push_back(-x);
        std::sort(z.begin(), z.end());
        prefix.resize(z.size() + 1, 0.0);
        for (std::size_t i = 0; i < z.size(); ++i) prefix[i + 1] = prefix[i] + z[i];
        n = static_cast<double>(r.size());
    }

    double operator()(double u) const {
        if (u <= 0.0 || z.empty()) return 0.0;
        auto it = std::lower_bound(z.begin(), z.end(), u);
        std::size_t k = static_cast<std::size_t>(it - z.begin()); // z[0..k) < u
        double below = prefix[k];
        double above = static_cast<double>(z.size() - k) * u;
        return (below + above) / n;
    }
};

struct EricksonVerdict {
    double statistic = std::numeric_limits<double>::infinity();
    bool stable = false;
};

// mean of g(x) = x / int_0^x P(R <= -y) dy over the positive part of R,
// with the tail integral built from an independent half of the sample
EricksonVerdict erickson_statistic(const std::vector<double>& tail_half,
                                   const std::vector<double>& eval_half) {
    TailIntegral denom(tail_half);
    std::vector<double> g;
    g.reserve(eval_half.size());
    for (double r : eval_half) {
        if (r <= 0.0) {
            g.push_back(0.0);
            continue;
        }
        double d = denom(r);
        g.push_back(d > 0.0 ? r / d : std::numeric_limits<double>::infinity());
    }
    EricksonVerdict v;
    std::size_t n = g.size();
    if (n < 4) return v;
    double m1 = prefix_mean(g, n / 4);
    double m2 = prefix_mean(g, n / 2);
    double m3 = prefix_mean(g, n);
    v.statistic = m3;
    v.stable = std::isfinite(m3) && std::fabs(m1 - m3) <= 0.1 * std::fabs(m3) &&
               std::fabs(m2 - m3) <= 0.1 * std::fabs(m3);
    return v;
}

} // namespace

DriftClass classify_drift(const Sampler& logstep, const DriftOptions& opts) {
    DriftClass out;
    if (opts.exact_mean) {
        // the band absorbs root-position noise when the mean is evaluated at a
        // numerically located root
        out.mean_log = *opts.exact_mean;
        out.mean_exact = true;
        if (out.mean_log < -1e-9)
            out.verdict = Drift::negative;
        else if (out.mean_log > 1e-9)
            out.verdict = Drift::positive;
        else
            out.verdict = Drift::oscillating;
        return out;
    }

    std::vector<double> r(opts.budget);
    parallel_for(opts.budget, opts.workers, [&](std::size_t i) {
        Rng rng = Rng::for_replica(opts.seed, i);
        r[i] = logstep(rng);
    });

    std::vector<double> plus(r.size()), minus(r.size());
    bool has_minus_inf = false;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] == -std::numeric_limits<double>::infinity()) has_minus_inf = true;
        plus[i] = std::max(r[i], 0.0);
        minus[i] = std::max(-r[i], 0.0);
    }
    if (has_minus_inf) {
        out.verdict = Drift::negative;
        out.mean_log = -std::numeric_limits<double>::infinity();
        return out;
    }

    bool heavy_plus = heavy_partial_means(plus, opts.heavy_ratio);
    bool heavy_minus = heavy_partial_means(minus, opts.heavy_ratio);

    if (!heavy_plus && !heavy_minus) {
        Estimate e = Estimate::from_samples(r);
        out.mean_log = e.value;
        out.mean_std_error = e.std_error;
        if (e.value < -opts.zero_band * e.std_error)
            out.verdict = Drift::negative;
        else if (e.value > opts.zero_band * e.std_error)
            out.verdict = Drift::positive;
        else
            out.verdict = Drift::oscillating;
        return out;
    }
    if (heavy_minus && !heavy_plus) {
        out.verdict = Drift::negative;
        out.mean_log = -std::numeric_limits<double>::infinity();
        return out;
    }
    if (heavy_plus && !heavy_minus) {
        out.verdict = Drift::positive;
        out.mean_log = std::numeric_limits<double>::infinity();
        return out;
    }

    // both one-sided means look divergent: Kesten-Maller statistic, both ways
    std::vector<double> first(r.begin(), r.begin() + r.size() / 2);
    std::vector<double> second(r.begin() + r.size() / 2, r.end());
    EricksonVerdict down = erickson_statistic(first, second);
    std::vector<double> neg_first(first.size()), neg_second(second.size());
    for (std::size_t i = 0; i < first.size(); ++i) neg_first[i] = -first[i];
    for (std::size_t i = 0; i < second.size(); ++i) neg_second[i] = -second[i];
    EricksonVerdict up = erickson_statistic(neg_first, neg_second);

    out.mean_log = std::numeric_limits<double>::quiet_NaN();
    out.erickson = down.statistic;
    if (down.stable && !up.stable)
        out.verdict = Drift::negative;
    else if (up.stable && !down.stable)
        out.verdict = Drift::positive;
    else
        out.verdict = Drift::inconclusive;
    return out;
}

// ---------------------------------------------------------------------------
// the integral test

IrEstimate compute_ir(const std::vector<double>& r_samples, const std::vector<double>& sigma_samples,
                      const std::function<double(double)>& exact_tail) {
    if (sigma_samples.empty()) raise(Errc::bad_input, "sigma sample array is empty");

    TailIntegral empirical(r_samples);
    auto denom = [&](double u) -> double {
        if (exact_tail)
            return numeric::adaptive_simpson(exact_tail, 0.0, u, 1e-12);
        return empirical(u);
    };

    std::vector<double> f(sigma_samples.size(), 0.0);
    bool infinite_point = false;
    for (std::size_t i = 0; i < sigma_samples.size(); ++i) {
        double x = sigma_samples[i];
        if (x <= 1.0) continue;
        double u = std::log(x);
        double d = denom(u);
        if (!(d > 0.0)) {
            infinite_point = true;
            f[i] = std::numeric_limits<double>::infinity();
        } else {
            f[i] = u / d;
        }
    }

    IrEstimate out;
    if (infinite_point) {
        out.value = std::numeric_limits<double>::infinity();
        out.finite = false;
        return out;
    }
    Estimate e = Estimate::from_samples(f);
    out.value = e.value;
    out.std_error = e.std_error;
    std::size_t n = f.size();
    if (out.value == 0.0) {
        out.finite = true; // no mass above 1
    } else if (n >= 4) {
        double m1 = prefix_mean(f, n / 4);
        double m2 = prefix_mean(f, n / 2);
        double m3 = prefix_mean(f, n);
        out.finite = std::fabs(m1 - m3) <= 0.1 * std::fabs(m3) &&
                     std::fabs(m2 - m3) <= 0.1 * std::fabs(m3);
    }
    return out;
}

IrEstimate compute_ir(const Sampler& logstep, const std::vector<double>& sigma_samples,
                      const IrOptions& opts) {
    std::vector<double> r(opts.r_budget);
    Rng rng(opts.seed);
    for (auto& x : r) x = logstep(rng);
    return compute_ir(r, sigma_samples, opts.exact_tail);
}

// ---------------------------------------------------------------------------
// existence verdict

CriteriaReport existence_verdict(const models::WeightModel& model, const VerdictOptions& opts) {
    models::validate_model(model);
    CriteriaReport rep;
    rep.beta_roots = solve_beta_roots(model, opts.search_max);
    double beta1 = rep.beta_roots.roots.front();

    models::NodeOptions node = opts.node;
    node.skip_condition_check = true;
    models::require_condition_d(model, beta1);

    // spine log-step mean: beta * t'(beta), exact for the built-in kinds; a
    // double root sits at the minimizer of t, where the derivative vanishes
    double exact_mean =
        rep.beta_roots.tangent ? 0.0 : beta1 * models::t_beta_derivative(model, beta1).value;
    DriftOptions dopt;
    dopt.exact_mean = exact_mean;
    rep.drift = classify_drift({}, dopt);

    // one batch of spine nodes: half feeds the step law, half the sigma law
    std::uint64_t k = std::max<std::uint64_t>(opts.budget, 64);
    std::vector<double> logm(k / 2), sigma(k - k / 2), chi(k - k / 2);
    parallel_for(k, opts.workers, [&](std::size_t i) {
        Rng rng = Rng::for_replica(opts.seed, i);
        auto nd = models::sample_size_biased_node(model, beta1, rng, node);
        if (i < logm.size()) {
            logm[i] = std::log(nd.m);
        } else {
            sigma[i - logm.size()] = nd.n;
            chi[i - logm.size()] = std::pow(nd.m, 1.0 / beta1);
        }
    });

    rep.i_r_sigma = compute_ir(logm, sigma);

    bool mean_finite = std::isfinite(rep.drift.mean_log);
    if (mean_finite) {
        std::vector<double> xlx(sigma.size());
        for (std::size_t i = 0; i < sigma.size(); ++i)
            xlx[i] = std::max(std::log(sigma[i]), 0.0);
        rep.xlogx = Estimate::from_samples(xlx);
    } else if (std::isnan(rep.drift.mean_log)) {
        rep.i_r_chi = compute_ir(logm, chi);
    }

    rep.exists = rep.drift.verdict == Drift::negative && rep.i_r_sigma.finite;
    if (rep.exists) {
        rep.alpha = beta1;
        if (mean_finite)
            rep.condition_case = 'a';
        else if (rep.drift.mean_log == -std::numeric_limits<double>::infinity())
            rep.condition_case = 'b';
        else if (rep.i_r_chi && rep.i_r_chi->finite)
            rep.condition_case = 'c';
    }
    return rep;
}

// ---------------------------------------------------------------------------
// regular variation of 1 - phi at zero

RegVarFit check_regular_variation(const lst::LstGrid& g, double beta_expected) {
    static const double zs[] = {2.0, 4.0, 8.0};
    const auto& s = g.args();
    std::vector<double> xs, ys;
    std::size_t used = 0;
    for (std::size_t i = 0; i < s.size() && used < 10; ++i) {
        double base = 1.0 - g(s[i]);
        if (!(base > 1e-14)) raise(Errc::grid_too_coarse, "1 - phi vanishes at the smallest arguments");
        for (double z : zs) {
            double num = 1.0 - g(z * s[i]);
            if (!(num > 0.0)) raise(Errc::grid_too_coarse, "1 - phi vanishes at scaled arguments");
            xs.push_back(std::log(z));
            ys.push_back(std::log(num / base));
        }
        ++used;
    }
    if (used < 10) raise(Errc::grid_too_coarse, "need ten usable small arguments");

    // least squares through the origin
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += xs[i] * ys[i];
        sxx += xs[i] * xs[i];
    }
    RegVarFit fit;
    fit.exponent = sxy / sxx;
    for (std::size_t i = 0; i < xs.size(); ++i)
        fit.max_residual = std::max(fit.max_residual, std::fabs(ys[i] / xs[i] - fit.exponent));
    fit.deviation = std::fabs(fit.exponent - beta_expected);
    return fit;
}

} // namespace smoothfix::criteria
