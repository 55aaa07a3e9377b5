#include "smoothfix/lst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smoothfix/errors.hpp"
#include "smoothfix/numeric.hpp"
#include "smoothfix/parallel.hpp"

namespace smoothfix::lst {

namespace {
constexpr double kLogFloor = -690.0; // log(1e-300)
}

std::vector<double> GridSpec::make() const { return numeric::log_grid(s_min, s_max, points); }

// ---------------------------------------------------------------------------
// LstGrid

namespace {

AlphaM fit_small_s(const std::vector<double>& s, const std::vector<double>& phi) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.size() && xs.size() < 10; ++i) {
        double one_minus = 1.0 - phi[i];
        if (one_minus > 1e-14) {
            xs.push_back(std::log(s[i]));
            ys.push_back(std::log(one_minus));
        }
    }
    AlphaM am;
    if (xs.size() < 3) {
        am.alpha = 1.0;
        am.m = std::max((1.0 - phi.front()) / s.front(), 1e-12);
        return am;
    }
    auto fit = numeric::fit_line(xs, ys);
    am.alpha = std::clamp(fit.slope, 1e-6, 1.0);
    am.m = std::exp(fit.intercept);
    am.residual = fit.max_residual;
    return am;
}

} // namespace

LstGrid::LstGrid(std::vector<double> args, std::vector<double> values)
    : s_(std::move(args)), phi_(std::move(values)) {
    if (s_.size() != phi_.size() || s_.size() < 12)
        raise(Errc::bad_input, "grid needs matching argument/value arrays (>= 12 points)");
    for (std::size_t i = 0; i < s_.size(); ++i) {
        if (!(s_[i] > 0.0) || (i > 0 && s_[i] <= s_[i - 1]))
            raise(Errc::bad_input, "grid arguments must be positive ascending");
        if (phi_[i] < -1e-9 || phi_[i] > 1.0 + 1e-9)
            raise(Errc::bad_input, "transform values must lie in [0,1]");
        phi_[i] = std::clamp(phi_[i], 0.0, 1.0);
    }
    extrap_ = fit_small_s(s_, phi_);
}

LstGrid LstGrid::from_function(const std::function<double(double)>& phi, const GridSpec& spec) {
    auto args = spec.make();
    std::vector<double> vals(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) vals[i] = phi(args[i]);
    LstGrid g(std::move(args), std::move(vals));
    g.set_analytic(phi);
    return g;
}

LstGrid LstGrid::from_samples(const mc::EmpiricalDist& dist, const GridSpec& spec) {
    auto args = spec.make();
    std::vector<double> vals(args.size());
    for (std::size_t i = 0; i < args.size(); ++i) vals[i] = dist.laplace(args[i]);
    LstGrid g(std::move(args), std::move(vals));
    g.set_backing(std::make_shared<mc::EmpiricalDist>(dist));
    return g;
}

LstGrid LstGrid::point_mass(double m, const GridSpec& spec) {
    return from_function([m](double s) { return std::exp(-m * s); }, spec);
}

const mc::EmpiricalDist& LstGrid::backing_samples() const {
    if (!backing_) raise(Errc::no_characteristic_function, "grid has no sample backing");
    return *backing_;
}

double LstGrid::operator()(double s) const {
    if (analytic_) return std::clamp(analytic_(s), 0.0, 1.0);
    if (s <= 0.0) return 1.0;
    if (s < s_.front()) {
        double v = 1.0 - extrap_.m * std::pow(s, extrap_.alpha);
        return std::clamp(v, phi_.front(), 1.0);
    }
    if (s >= s_.back()) return phi_.back();
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t hi = static_cast<std::size_t>(it - s_.begin());
    std::size_t lo = hi - 1;
    double l0 = 1.0 - phi_[lo], l1 = 1.0 - phi_[hi];
    if (l0 <= 0.0 || l1 <= 0.0) {
        // flat-at-one region: fall back to linear interpolation
        double u = (s - s_[lo]) / (s_[hi] - s_[lo]);
        return phi_[lo] * (1.0 - u) + phi_[hi] * u;
    }
    double u = (std::log(s) - std::log(s_[lo])) / (std::log(s_[hi]) - std::log(s_[lo]));
    double lv = std::log(l0) * (1.0 - u) + std::log(l1) * u;
    return 1.0 - std::exp(lv);
}

void check_shape(const LstGrid& g) {
    const auto& s = g.args();
    const auto& phi = g.values();
    double prev_slope = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (phi[i + 1] > phi[i] + 1e-12) raise(Errc::bad_input, "grid values must be nonincreasing");
        double slope = (phi[i + 1] - phi[i]) / (s[i + 1] - s[i]);
        if (slope < prev_slope - 1e-9) raise(Errc::bad_input, "grid values must be convex");
        prev_slope = slope;
    }
    if (phi.front() < 1.0 - 10.0 * g.extrapolation().m * s.front() - 1e-9)
        raise(Errc::bad_input, "grid does not approach 1 at the origin");
}

AlphaM estimate_alpha_m(const LstGrid& g) {
    const auto& s = g.args();
    const auto& phi = g.values();
    std::size_t usable = 0;
    for (std::size_t i = 0; i < 10 && i < s.size(); ++i)
        if (1.0 - phi[i] > 1e-14) ++usable;
    if (usable < 10)
        raise(Errc::degenerate_at_zero, "transform is indistinguishable from 1 near the origin");
    return fit_small_s(s, phi);
}

// ---------------------------------------------------------------------------
// Picard step

namespace {

// int_0^s (1 - phi(u)) / u du, analytic power-law head plus log-scale Simpson
double small_arg_integral(const LstGrid& g, double s, double quad_tol) {
    const AlphaM& am = g.extrapolation();
    double u0 = std::min(g.args().front() * 1e-3, s);
    double head = am.m * std::pow(u0, am.alpha) / am.alpha;
    if (u0 >= s) return head;
    double body = numeric::adaptive_simpson(
        [&](double v) { return 1.0 - g(std::exp(v)); }, std::log(u0), std::log(s), quad_tol);
    return head + body;
}

double step_exact(const LstGrid& g, const models::WeightModel& model, double s,
                  double quad_tol) {
    using K = models::WeightModel::Kind;
    switch (model.kind()) {
        case K::fixed_weights: {
            double acc = 0.0;
            for (double w : model.weights()) {
                double p = g(w * s);
                acc += std::log(std::max(p, 1e-300));
            }
            return acc < kLogFloor ? 0.0 : std::exp(acc);
        }
        case K::common_random_weight: {
            double n = static_cast<double>(model.count());
            double v = 0.0;
            for (const auto& a : model.atoms()) v += a.prob * std::pow(g(a.value * s), n);
            return v;
        }
        case K::random_count_fixed_weight:
            return model.count_dist().pgf(g(model.weight_value() * s));
        case K::shot_noise: {
            const auto& h = model.profile();
            double lam = model.intensity();
            double expo;
            if (h.kind() == models::DecayProfile::Kind::exponential) {
                expo = lam / h.rate() * small_arg_integral(g, s, quad_tol);
            } else {
                expo = 0.0;
                double lo = 0.0;
                for (std::size_t i = 0; i < h.edges().size(); ++i) {
                    expo += lam * (h.edges()[i] - lo) * (1.0 - g(h.levels()[i] * s));
                    lo = h.edges()[i];
                }
            }
            return std::exp(-expo);
        }
    }
    raise(Errc::evaluation_failed, "unreachable model kind");
}

} // namespace

LstGrid picard_step(const LstGrid& g, const models::WeightModel& model,
                    const PicardOptions& opts) {
    models::validate_model(model);
    const auto& args = g.args();
    std::vector<double> out(args.size());

    if (!opts.force_mc) {
        parallel_for(args.size(), opts.workers,
                     [&](std::size_t k) { out[k] = step_exact(g, model, args[k], opts.quad_tol); });
        return LstGrid(args, std::move(out));
    }

    // Monte Carlo over realizations, common across grid arguments
    std::vector<std::vector<double>> rows(opts.mc_budget);
    parallel_for(opts.mc_budget, opts.workers, [&](std::size_t j) {
        Rng rng = Rng::for_replica(opts.seed, j);
        models::PointSample ps = models::sample_points(model, rng, opts.tail_tol);
        auto& row = rows[j];
        row.resize(args.size());
        for (std::size_t k = 0; k < args.size(); ++k) {
            double acc = 0.0;
            for (double x : ps.weights) acc += std::log(std::max(g(x * args[k]), 1e-300));
            row[k] = acc < kLogFloor ? 0.0 : std::exp(acc);
        }
    });
    for (std::size_t k = 0; k < args.size(); ++k) {
        double m = 0.0;
        for (std::size_t j = 0; j < rows.size(); ++j) m += rows[j][k];
        out[k] = m / static_cast<double>(rows.size());
    }
    bool all_zero = true;
    for (double v : out)
        if (v > 0.0) all_zero = false;
    if (all_zero) raise(Errc::product_underflow, "transform flushed to zero on the whole grid");
    return LstGrid(args, std::move(out));
}

PicardIteration picard_iterate(const LstGrid& seed, const models::WeightModel& model,
                               const IterateLstOptions& opts) {
    PicardIteration res{seed, false, 0, {}};
    for (std::uint64_t it = 0; it < opts.max_iter; ++it) {
        PicardOptions step = opts.step;
        step.seed = Rng::derive(opts.step.seed, it);
        LstGrid next = picard_step(res.grid, model, step);
        double sup = 0.0;
        for (std::size_t k = 0; k < next.values().size(); ++k)
            sup = std::max(sup, std::fabs(next.values()[k] - res.grid.values()[k]));
        res.sup_trace.push_back(sup);
        res.grid = std::move(next);
        res.iterations = it + 1;
        if (sup < opts.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// minimal metric and contraction

RDelta r_delta_distance(const mc::EmpiricalDist& a, const mc::EmpiricalDist& b, double delta,
                        const RDeltaOptions& opts) {
    if (!(delta > 1.0 && delta < 2.0)) raise(Errc::bad_input, "delta must lie in (1,2)");
    if (std::fabs(a.mean() - b.mean()) > opts.mean_tol)
        raise(Errc::mean_mismatch, "distributions must share the first moment");
    auto grid = numeric::log_grid(opts.s_min, opts.s_max, opts.points);
    // integrate e^{-delta v} |cf_a - cf_b|(e^v) dv on the log grid
    std::vector<double> integrand(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double s = grid[i];
        integrand[i] = std::abs(a.char_fn(s) - b.char_fn(s)) * std::pow(s, -delta);
    }
    double value = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double dv = std::log(grid[i + 1]) - std::log(grid[i]);
        value += 0.5 * (integrand[i] + integrand[i + 1]) * dv;
    }
    RDelta out;
    out.value = value;
    // assume quadratic decay of |cf_a - cf_b| below s_min and bounded above s_max
    double low = std::abs(a.char_fn(opts.s_min) - b.char_fn(opts.s_min));
    out.tail_bound = low * std::pow(opts.s_min, -delta) / (2.0 - delta) +
                     2.0 * std::pow(opts.s_max, -delta) / delta;
    return out;
}

double contraction_ratio(const models::WeightModel& model, const mc::EmpiricalDist& nu1,
                         const mc::EmpiricalDist& nu2, double p,
                         const ContractionOptions& opts) {
    double tp = models::t_beta(model, p).value;
    if (!(tp < 1.0)) raise(Errc::hypotheses_violated, "t(p) must be below 1");
    double sp = models::sum_weights_moment(model, p).value;
    if (!std::isfinite(sp)) raise(Errc::hypotheses_violated, "E (sum X)^p must be finite");

    double m = nu1.mean();
    mc::EmpiricalDist b = nu2.scaled(m / nu2.mean());
    if (mc::ks_distance(nu1, b) == 0.0)
        raise(Errc::degenerate_pair, "contraction ratio needs distinct inputs");

    double denom = r_delta_distance(nu1, b, p, opts.metric).value;
    if (!(denom > 0.0)) raise(Errc::degenerate_pair, "inputs are metrically identical");

    mc::StepOptions step;
    step.replicas = opts.replicas;
    step.seed = opts.seed; // common noise across both pushes
    step.workers = opts.workers;
    mc::EmpiricalDist t1 = mc::population_step(model, nu1, step);
    mc::EmpiricalDist t2 = mc::population_step(model, b, step);
    // rescale the common sampling drift back to the target mean
    t1 = t1.scaled(m / t1.mean());
    t2 = t2.scaled(m / t2.mean());
    double numer = r_delta_distance(t1, t2, p, opts.metric).value;
    return numer / denom;
}

// ---------------------------------------------------------------------------
// stable transformation

LstGrid stable_transform(const LstGrid& g, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) raise(Errc::bad_input, "alpha must lie in (0,1)");
    std::vector<double> args(g.args().size());
    for (std::size_t i = 0; i < args.size(); ++i) args[i] = std::pow(g.args()[i], 1.0 / alpha);
    LstGrid out(std::move(args), g.values());
    if (g.has_analytic()) {
        auto f = g.analytic();
        out.set_analytic([f, alpha](double s) { return f(std::pow(s, alpha)); });
    }
    return out;
}

mc::EmpiricalDist stable_transform(const mc::EmpiricalDist& base, double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) raise(Errc::bad_input, "alpha must lie in (0,1)");
    std::vector<double> out(base.size());
    const auto& xs = base.samples();
    for (std::size_t i = 0; i < xs.size(); ++i)
        out[i] = std::pow(xs[i], 1.0 / alpha) * mc::positive_stable_draw(alpha, rng);
    return mc::EmpiricalDist(std::move(out));
}

LstGrid inverse_stable_transform(const LstGrid& g, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) raise(Errc::bad_input, "alpha must lie in (0,1)");
    std::vector<double> args(g.args().size());
    for (std::size_t i = 0; i < args.size(); ++i) args[i] = std::pow(g.args()[i], alpha);
    LstGrid out(std::move(args), g.values());
    if (g.has_analytic()) {
        auto f = g.analytic();
        out.set_analytic([f, alpha](double s) { return f(std::pow(s, 1.0 / alpha)); });
    }
    return out;
}

} // namespace smoothfix::lst
