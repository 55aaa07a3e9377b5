#include "smoothfix/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "smoothfix/errors.hpp"
#include "smoothfix/numeric.hpp"
#include "smoothfix/parallel.hpp"

namespace smoothfix::mc {

// ---------------------------------------------------------------------------
// EmpiricalDist

EmpiricalDist::EmpiricalDist(std::vector<double> samples, std::vector<double> weights)
    : samples_(std::move(samples)), weights_(std::move(weights)) {
    if (samples_.empty()) raise(Errc::empty_pool, "empirical distribution needs samples");
    if (!weights_.empty()) {
        if (weights_.size() != samples_.size())
            raise(Errc::bad_input, "weights/samples size mismatch");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w > 0.0)) raise(Errc::bad_input, "weights must be positive");
            total += w;
        }
        if (std::fabs(total - 1.0) > 1e-9) raise(Errc::bad_input, "weights must sum to 1");
    }
}

EmpiricalDist EmpiricalDist::point_mass(double c, std::size_t n) {
    return EmpiricalDist(std::vector<double>(n, c));
}

EmpiricalDist EmpiricalDist::exponential(double rate, std::size_t n, Rng& rng) {
    std::vector<double> xs(n);
    for (auto& x : xs) x = rng.exponential(rate);
    return EmpiricalDist(std::move(xs));
}

double EmpiricalDist::mean() const {
    double m = 0.0;
    if (weighted()) {
        for (std::size_t i = 0; i < samples_.size(); ++i) m += weights_[i] * samples_[i];
        return m;
    }
    for (double x : samples_) m += x;
    return m / static_cast<double>(samples_.size());
}

double EmpiricalDist::moment(double p) const {
    double m = 0.0;
    if (weighted()) {
        for (std::size_t i = 0; i < samples_.size(); ++i)
            m += weights_[i] * std::pow(samples_[i], p);
        return m;
    }
    for (double x : samples_) m += std::pow(x, p);
    return m / static_cast<double>(samples_.size());
}

double EmpiricalDist::laplace(double s) const {
    double m = 0.0;
    if (weighted()) {
        for (std::size_t i = 0; i < samples_.size(); ++i)
            m += weights_[i] * std::exp(-s * samples_[i]);
        return m;
    }
    for (double x : samples_) m += std::exp(-s * x);
    return m / static_cast<double>(samples_.size());
}

std::complex<double> EmpiricalDist::char_fn(double s) const {
    double re = 0.0, im = 0.0;
    if (weighted()) {
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            re += weights_[i] * std::cos(s * samples_[i]);
            im += weights_[i] * std::sin(s * samples_[i]);
        }
        return {re, im};
    }
    for (double x : samples_) {
        re += std::cos(s * x);
        im += std::sin(s * x);
    }
    double n = static_cast<double>(samples_.size());
    return {re / n, im / n};
}

const std::vector<double>& EmpiricalDist::sorted() const {
    if (!sorted_) {
        auto v = std::make_shared<std::vector<double>>(samples_);
        std::sort(v->begin(), v->end());
        sorted_ = std::move(v);
    }
    return *sorted_;
}

double EmpiricalDist::tail(double x) const {
    if (weighted()) {
        double t = 0.0;
        for (std::size_t i = 0; i < samples_.size(); ++i)
            if (samples_[i] > x) t += weights_[i];
        return t;
    }
    const auto& s = sorted();
    auto it = std::upper_bound(s.begin(), s.end(), x);
    return static_cast<double>(s.end() - it) / static_cast<double>(s.size());
}

double EmpiricalDist::quantile(double q) const {
    const auto& s = sorted();
    if (q <= 0.0) return s.front();
    if (q >= 1.0) return s.back();
    double pos = q * static_cast<double>(s.size() - 1);
    std::size_t i = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(i);
    if (i + 1 >= s.size()) return s.back();
    return s[i] * (1.0 - frac) + s[i + 1] * frac;
}

EmpiricalDist EmpiricalDist::scaled(double c) const {
    std::vector<double> xs(samples_.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = c * samples_[i];
    EmpiricalDist out(std::move(xs), weights_);
    out.lineage = lineage;
    out.truncation_bound = truncation_bound * c;
    return out;
}

// ---------------------------------------------------------------------------
// BRW martingale

BrwResult simulate_brw_martingale(const models::WeightModel& model, const BrwOptions& opts) {
    models::validate_model(model);
    double tg = models::t_beta(model, opts.gamma).value;
    if (!std::isfinite(tg) || !(tg > 0.0)) raise(Errc::divergent, "t(gamma) not positive finite");
    double norm = std::pow(tg, opts.generations);

    std::vector<double> vals(opts.replicas);
    std::vector<std::uint8_t> censored(opts.replicas, 0);
    parallel_for(opts.replicas, opts.workers, [&](std::size_t r) {
        Rng rng = Rng::for_replica(opts.seed, r);
        std::vector<double> level{1.0};
        std::vector<double> next;
        std::uint64_t nodes = 1;
        for (int gen = 0; gen < opts.generations; ++gen) {
            next.clear();
            for (double prod : level) {
                models::PointSample ps = models::sample_points(model, rng, opts.tail_tol);
                for (double x : ps.weights) next.push_back(prod * std::pow(x, opts.gamma));
                nodes += ps.weights.size();
                if (nodes > opts.pop_cap) {
                    censored[r] = 1;
                    return;
                }
            }
            level.swap(next);
        }
        double sum = 0.0;
        for (double prod : level) sum += prod;
        vals[r] = sum / norm;
    });

    BrwResult out;
    out.generations = opts.generations;
    out.gamma = opts.gamma;
    out.norm = norm;
    for (std::size_t r = 0; r < opts.replicas; ++r) {
        if (censored[r])
            ++out.censored;
        else
            out.samples.push_back(vals[r]);
    }
    if (out.samples.empty()) raise(Errc::evaluation_failed, "every replica was censored");
    return out;
}

// ---------------------------------------------------------------------------
// spine perpetuity

SpineResult simulate_spine_perpetuity(const models::WeightModel& model, const SpineOptions& opts) {
    models::validate_model(model);
    models::require_condition_d(model, opts.beta);
    models::NodeOptions node = opts.node;
    node.skip_condition_check = true;

    std::vector<double> v1(opts.replicas), v2(opts.replicas);
    std::vector<std::uint8_t> cut(opts.replicas, 0);
    parallel_for(opts.replicas, opts.workers, [&](std::size_t r) {
        Rng rng = Rng::for_replica(opts.seed, r);
        auto first = models::sample_size_biased_node(model, opts.beta, rng, node);
        double a = first.n; // V_1
        double b = 0.0;     // V_2
        double prod = 1.0;
        for (int k = 1; k < opts.depth; ++k) {
            prod *= first.m;
            // the product multiplies only strictly earlier M's; draw the next
            // node fresh so every N meets an independent prefix
            auto nxt = models::sample_size_biased_node(model, opts.beta, rng, node);
            a += prod * nxt.n;
            b += prod;
            first = nxt;
            if (prod < opts.product_cutoff) {
                cut[r] = 1;
                break;
            }
        }
        v1[r] = a;
        v2[r] = b;
    });

    SpineResult out;
    out.depth = opts.depth;
    out.v1 = std::move(v1);
    out.v2 = std::move(v2);
    out.v.resize(opts.replicas);
    std::uint64_t ncut = 0;
    for (std::size_t r = 0; r < opts.replicas; ++r) {
        out.v[r] = out.v1[r] - out.v2[r];
        ncut += cut[r];
    }
    out.cutoff_fraction = static_cast<double>(ncut) / static_cast<double>(opts.replicas);

    // partial means of V_1 across doubling prefixes
    auto prefix_mean = [&](std::size_t n) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += out.v1[i];
        return s / static_cast<double>(n);
    };
    std::size_t n = out.v1.size();
    if (n >= 4) {
        double m1 = prefix_mean(n / 4), m2 = prefix_mean(n / 2), m3 = prefix_mean(n);
        double scale = std::fabs(m3) + 1e-300;
        out.v1_mean_stable =
            std::fabs(m2 - m3) <= 0.1 * scale && std::fabs(m1 - m3) <= 0.1 * scale;
    }
    return out;
}

// ---------------------------------------------------------------------------
// population dynamics

namespace {

double resample(const std::vector<double>& pool, Rng& rng) {
    std::size_t i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(pool.size()));
    if (i >= pool.size()) i = pool.size() - 1;
    return pool[i];
}

} // namespace

EmpiricalDist population_step(const models::WeightModel& model, const EmpiricalDist& pool,
                              const StepOptions& opts) {
    if (pool.size() == 0) raise(Errc::empty_pool, "population_step needs a nonempty pool");
    const auto& src = pool.samples();
    std::vector<double> out(opts.replicas);
    double bound = 0.0;
    if (model.kind() == models::WeightModel::Kind::shot_noise)
        bound = opts.tail_tol * pool.mean();
    parallel_for(opts.replicas, opts.workers, [&](std::size_t r) {
        Rng rng = Rng::for_replica(opts.seed, r);
        models::PointSample ps = models::sample_points(model, rng, opts.tail_tol);
        double s = 0.0;
        for (double x : ps.weights) s += x * resample(src, rng);
        out[r] = s;
    });
    EmpiricalDist result(std::move(out));
    result.truncation_bound = bound;
    result.lineage = "population_step:" + model.describe() + ":seed=" + std::to_string(opts.seed);
    return result;
}

IterateResult iterate_population(const models::WeightModel& model, const EmpiricalDist& seed_pool,
                                 const IterateOptions& opts) {
    EmpiricalDist pool = seed_pool;
    double initial_mean = pool.mean();
    IterateResult res{pool, {}, {}};
    for (std::uint64_t it = 0; it < opts.iterations; ++it) {
        StepOptions step;
        step.replicas = opts.replicas;
        step.seed = Rng::derive(opts.seed, it);
        step.workers = opts.workers;
        step.tail_tol = opts.tail_tol;
        EmpiricalDist next = population_step(model, res.pool, step);
        if (opts.track_ks) res.ks_trace.push_back(ks_distance(res.pool, next));
        res.mean_trace.push_back(next.mean());
        if (next.mean() < opts.collapse_ratio * initial_mean)
            raise(Errc::mean_collapse, "pool mean collapsed; degenerate regime");
        res.pool = std::move(next);
    }
    res.pool.lineage = "iterate_population:" + model.describe() + ":seed=" +
                       std::to_string(opts.seed) + ":iterations=" + std::to_string(opts.iterations);
    return res;
}

// ---------------------------------------------------------------------------
// shot noise sampling

EmpiricalDist sample_shot_noise(const models::DecayProfile& h, double lambda,
                                const EmpiricalDist& pool, double shift,
                                const ShotNoiseOptions& opts) {
    if (!(lambda > 0.0)) raise(Errc::bad_input, "lambda must be positive");
    if (pool.size() == 0) raise(Errc::empty_pool, "sample_shot_noise needs a pool");
    double T = h.horizon(opts.tail_tol / lambda);
    const auto& src = pool.samples();
    std::vector<double> out(opts.replicas);
    parallel_for(opts.replicas, opts.workers, [&](std::size_t r) {
        Rng rng = Rng::for_replica(opts.seed, r);
        double s = shift;
        double t = 0.0;
        while (true) {
            t += rng.exponential(lambda);
            if (t >= T) break;
            double x = h(t);
            if (x > 0.0) s += x * resample(src, rng);
        }
        out[r] = s;
    });
    EmpiricalDist result(std::move(out));
    result.truncation_bound = lambda * h.tail_integral(T) * pool.mean();
    result.lineage = "sample_shot_noise:seed=" + std::to_string(opts.seed);
    return result;
}

// ---------------------------------------------------------------------------
// size biasing

EmpiricalDist size_bias(const EmpiricalDist& dist, Rng& rng, std::size_t out_size) {
    if (!(dist.mean() > 0.0)) raise(Errc::zero_mean, "size_bias needs a positive mean");
    const auto& xs = dist.samples();
    std::vector<double> cum(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double w = dist.weighted() ? dist.weights()[i] * xs[i] : xs[i];
        acc += w;
        cum[i] = acc;
    }
    std::vector<double> out(out_size);
    for (auto& o : out) {
        double u = rng.uniform() * acc;
        auto it = std::lower_bound(cum.begin(), cum.end(), u);
        o = xs[static_cast<std::size_t>(it - cum.begin())];
    }
    EmpiricalDist result(std::move(out));
    result.lineage = dist.lineage.empty() ? "size_bias" : "size_bias<" + dist.lineage;
    return result;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

double NamedLaw::cdf(double x) const {
    switch (kind) {
        case Kind::exponential: return x <= 0.0 ? 0.0 : 1.0 - std::exp(-a * x);
        case Kind::gamma: return x <= 0.0 ? 0.0 : numeric::gamma_p(a, b * x);
        case Kind::point_mass: return x >= a ? 1.0 : 0.0;
    }
    return 0.0;
}

double ks_distance(const EmpiricalDist& a, const EmpiricalDist& b) {
    const auto& xa = a.sorted();
    const auto& xb = b.sorted();
    std::size_t i = 0, j = 0;
    double na = static_cast<double>(xa.size()), nb = static_cast<double>(xb.size());
    double d = 0.0;
    while (i < xa.size() && j < xb.size()) {
        double x = std::min(xa[i], xb[j]);
        while (i < xa.size() && xa[i] <= x) ++i;
        while (j < xb.size() && xb[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double NamedLaw::cdf_left(double x) const {
    if (kind == Kind::point_mass) return x > a ? 1.0 : 0.0;
    return cdf(x);
}

double ks_distance(const EmpiricalDist& a, const NamedLaw& law) {
    const auto& xs = a.sorted();
    double n = static_cast<double>(xs.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < xs.size()) {
        std::size_t j = i;
        while (j < xs.size() && xs[j] == xs[i]) ++j;
        d = std::max(d, std::fabs(law.cdf_left(xs[i]) - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(law.cdf(xs[i]) - static_cast<double>(j) / n));
        i = j;
    }
    return d;
}

// ---------------------------------------------------------------------------
// positive stable sampler (Kanter construction)

double positive_stable_draw(double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) raise(Errc::bad_input, "alpha must lie in (0,1)");
    const double pi = 3.14159265358979323846;
    double u = rng.uniform() * pi;
    double e = rng.exponential(1.0);
    double a = std::pow(std::sin(alpha * u), alpha / (1.0 - alpha)) *
               std::sin((1.0 - alpha) * u) /
               std::pow(std::sin(u), 1.0 / (1.0 - alpha));
    return std::pow(a / e, (1.0 - alpha) / alpha);
}

EmpiricalDist sample_positive_stable(double alpha, std::size_t count, Rng& rng) {
    std::vector<double> xs(count);
    for (auto& x : xs) x = positive_stable_draw(alpha, rng);
    return EmpiricalDist(std::move(xs));
}

} // namespace smoothfix::mc
