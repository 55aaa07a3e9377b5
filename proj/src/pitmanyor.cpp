#include "smoothfix/pitmanyor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smoothfix/errors.hpp"
#include "smoothfix/numeric.hpp"

namespace smoothfix::pitmanyor {

// ---------------------------------------------------------------------------
// NuDist

NuDist NuDist::uniform01() { return NuDist{}; }

NuDist NuDist::from_atoms(std::vector<models::Atom> atoms) {
    if (atoms.empty()) raise(Errc::bad_input, "empty atom list");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.value > 0.0)) raise(Errc::bad_input, "nu atoms must be positive; zero mass lives in gamma0");
        if (!(a.prob > 0.0)) raise(Errc::bad_input, "atom probabilities must be positive");
        total += a.prob;
    }
    if (std::fabs(total - 1.0) > 1e-12) raise(Errc::bad_input, "atom probabilities must sum to 1");
    std::sort(atoms.begin(), atoms.end(),
              [](const models::Atom& x, const models::Atom& y) { return x.value < y.value; });
    NuDist d;
    d.kind_ = Kind::atoms;
    d.atoms_ = std::move(atoms);
    return d;
}

NuDist NuDist::tabulated(std::vector<double> xs, std::vector<double> cdf) {
    if (xs.size() != cdf.size() || xs.size() < 2) raise(Errc::bad_input, "tabulated CDF needs >= 2 points");
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || (i > 0 && xs[i] <= xs[i - 1]))
            raise(Errc::bad_input, "tabulated support must be positive ascending");
        if (cdf[i] < 0.0 || cdf[i] > 1.0 || (i > 0 && cdf[i] < cdf[i - 1]))
            raise(Errc::bad_input, "CDF values must be nondecreasing in [0,1]");
    }
    if (std::fabs(cdf.back() - 1.0) > 1e-9) raise(Errc::bad_input, "tabulated CDF must reach 1");
    NuDist d;
    d.kind_ = Kind::tabulated;
    d.xs_ = std::move(xs);
    d.cdf_ = std::move(cdf);
    return d;
}

double NuDist::sample(Rng& rng) const {
    switch (kind_) {
        case Kind::uniform01: return rng.uniform();
        case Kind::atoms: {
            double u = rng.uniform();
            double acc = 0.0;
            for (const auto& a : atoms_) {
                acc += a.prob;
                if (u <= acc) return a.value;
            }
            return atoms_.back().value;
        }
        case Kind::tabulated: {
            double u = rng.uniform() * cdf_.back();
            auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
            std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
            if (i == 0) return xs_.front();
            double f0 = cdf_[i - 1], f1 = cdf_[i];
            double w = f1 > f0 ? (u - f0) / (f1 - f0) : 0.0;
            return xs_[i - 1] + w * (xs_[i] - xs_[i - 1]);
        }
    }
    return 0.0;
}

std::optional<double> NuDist::exact_mean_log() const {
    if (kind_ == Kind::uniform01) return -1.0;
    if (kind_ == Kind::atoms) {
        double m = 0.0;
        for (const auto& a : atoms_) m += a.prob * std::log(a.value);
        return m;
    }
    return std::nullopt;
}

double NuDist::cdf_at(double x) const {
    switch (kind_) {
        case Kind::uniform01: return std::clamp(x, 0.0, 1.0);
        case Kind::atoms: {
            double f = 0.0;
            for (const auto& a : atoms_)
                if (a.value <= x) f += a.prob;
            return f;
        }
        case Kind::tabulated: {
            if (x < xs_.front()) return 0.0;
            if (x >= xs_.back()) return 1.0;
            auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
            std::size_t i = static_cast<std::size_t>(it - xs_.begin());
            double w = (x - xs_[i - 1]) / (xs_[i] - xs_[i - 1]);
            return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
        }
    }
    return 0.0;
}

void validate_problem(const PitmanYorProblem& problem) {
    if (!(problem.gamma0 >= 0.0 && problem.gamma0 < 1.0))
        raise(Errc::bad_input, "gamma0 must lie in [0,1)");
    if (!(problem.m > 0.0)) raise(Errc::bad_input, "target mean must be positive");
}

// ---------------------------------------------------------------------------
// the correspondence between nu and the decay profile

models::DecayProfile nu_to_h(const PitmanYorProblem& problem, std::size_t grid_resolution) {
    validate_problem(problem);
    double mass = 1.0 - problem.gamma0;
    const NuDist& nu = problem.nu;

    models::DecayProfile h = models::DecayProfile::exponential(1.0);
    switch (nu.kind()) {
        case NuDist::Kind::uniform01:
            // h_inv(x) = mass * (-log x) on (0,1), so h(t) = exp(-t / mass)
            h = models::DecayProfile::exponential(1.0 / mass);
            break;
        case NuDist::Kind::atoms: {
            // descending atom values d_k; h is a staircase with treads q_k/d_k
            std::vector<models::Atom> desc = nu.atoms();
            std::sort(desc.begin(), desc.end(),
                      [](const models::Atom& a, const models::Atom& b) { return a.value > b.value; });
            std::vector<double> edges, levels;
            double t = 0.0;
            for (const auto& a : desc) {
                t += mass * a.prob / a.value;
                edges.push_back(t);
                levels.push_back(a.value);
            }
            h = models::DecayProfile::step(std::move(edges), std::move(levels));
            break;
        }
        case NuDist::Kind::tabulated: {
            // evaluate h_inv on a log grid by integrating z^{-1} dF from the top
            const auto& xs = nu.xs();
            auto grid = numeric::log_grid(xs.front(), xs.back(), grid_resolution);
            std::vector<double> hinv(grid.size(), 0.0);
            for (std::size_t i = grid.size(); i-- > 1;) {
                double x0 = grid[i - 1], x1 = grid[i];
                double df = nu.cdf_at(x1) - nu.cdf_at(x0);
                double mid = 0.5 * (x0 + x1);
                hinv[i - 1] = hinv[i] + mass * df / mid;
                if (!std::isfinite(hinv[i - 1]))
                    raise(Errc::divergent_inverse_moment, "partial inverse moment diverged");
            }
            // h is the right-continuous inverse of the staircase hinv
            std::vector<double> edges, levels;
            for (std::size_t i = grid.size(); i-- > 0;) {
                double e = hinv[i];
                double v = grid[i];
                if (e <= 0.0) continue;
                if (!edges.empty() && e <= edges.back()) continue;
                edges.push_back(e);
                levels.push_back(v);
            }
            // the staircase reconstruction quantizes the mass; rescale the
            // time axis so the integral is exact (atom values are untouched)
            double raw = 0.0;
            double lo = 0.0;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                raw += levels[i] * (edges[i] - lo);
                lo = edges[i];
            }
            if (!(raw > 0.0)) raise(Errc::divergent_inverse_moment, "degenerate reconstruction");
            for (auto& e : edges) e *= mass / raw;
            h = models::DecayProfile::step(std::move(edges), std::move(levels));
            break;
        }
    }
    double integral = h.integral();
    if (std::fabs(integral - mass) > 1e-6 * std::max(1.0, mass))
        raise(Errc::divergent_inverse_moment, "profile integral does not match 1 - gamma0");
    return h;
}

RecoveredNu h_to_nu(const models::DecayProfile& h, double lambda) {
    if (!(lambda > 0.0)) raise(Errc::bad_input, "lambda must be positive");
    RecoveredNu out;
    double total = lambda * h.integral();
    if (total > 1.0 + 1e-9) raise(Errc::mass_deficit, "lambda * integral(h) exceeds 1");
    out.gamma0 = std::max(0.0, 1.0 - total);

    if (h.kind() == models::DecayProfile::Kind::exponential) {
        // -lambda x d h_inv = (lambda / rate) dx on (0,1): uniform component
        if (std::fabs(total - 1.0) > 1e-9 && out.gamma0 == 0.0)
            raise(Errc::mass_deficit, "mass does not add to 1");
        out.nu = NuDist::uniform01();
        return out;
    }
    const auto& edges = h.edges();
    const auto& levels = h.levels();
    std::vector<models::Atom> atoms;
    double lo = 0.0;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        double massk = lambda * levels[i] * (edges[i] - lo);
        atoms.push_back({levels[i], massk / total});
        lo = edges[i];
    }
    out.nu = NuDist::from_atoms(std::move(atoms));
    return out;
}

// ---------------------------------------------------------------------------
// existence and the solver

criteria::DriftClass check_existence(const PitmanYorProblem& problem,
                                     const criteria::DriftOptions& opts) {
    validate_problem(problem);
    if (problem.gamma0 > 0.0) {
        // an atom at zero kills the walk almost surely
        criteria::DriftClass d;
        d.verdict = criteria::Drift::negative;
        d.mean_log = -std::numeric_limits<double>::infinity();
        d.mean_exact = true;
        return d;
    }
    criteria::DriftOptions o = opts;
    if (!o.exact_mean) o.exact_mean = problem.nu.exact_mean_log();
    const NuDist& nu = problem.nu;
    return criteria::classify_drift([nu](Rng& rng) { return std::log(nu.sample(rng)); }, o);
}

mc::EmpiricalDist solve_pitman_yor(const PitmanYorProblem& problem, const SolveOptions& opts) {
    auto drift = check_existence(problem);
    if (drift.verdict != criteria::Drift::negative)
        raise(Errc::hypotheses_violated, "no nontrivial solution: the log A walk does not drift down");
    models::DecayProfile h = nu_to_h(problem);
    double shift = problem.m * problem.gamma0;

    mc::EmpiricalDist pool = mc::EmpiricalDist::point_mass(problem.m, opts.replicas);
    for (std::uint64_t it = 0; it < opts.iterations; ++it) {
        mc::ShotNoiseOptions step;
        step.replicas = opts.replicas;
        step.seed = Rng::derive(opts.seed, it);
        step.workers = opts.workers;
        step.tail_tol = opts.tail_tol;
        pool = mc::sample_shot_noise(h, 1.0, pool, shift, step);
        // without the shift the equation is scale-free and the pool mean is a
        // resampling martingale; pin it to the target to stop the random walk
        if (problem.gamma0 == 0.0) pool = pool.scaled(problem.m / pool.mean());
    }
    pool.lineage = "pitman-yor";
    return pool;
}

SizeBiasCheck verify_size_bias_equation(const mc::EmpiricalDist& mu,
                                        const PitmanYorProblem& problem,
                                        const VerifyOptions& opts) {
    validate_problem(problem);
    if (!(mu.mean() > 0.0)) raise(Errc::zero_mean, "mu must have positive mean");

    Rng rng(opts.seed);
    mc::EmpiricalDist lhs = mc::size_bias(mu, rng, opts.samples);
    mc::EmpiricalDist sb = mc::size_bias(mu, rng, opts.samples);
    const auto& xs = mu.samples();
    std::vector<double> rhs(opts.samples);
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        double a = rng.uniform() < problem.gamma0 ? 0.0 : problem.nu.sample(rng);
        std::size_t j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(xs.size()));
        if (j >= xs.size()) j = xs.size() - 1;
        rhs[i] = a * sb.samples()[i] + xs[j];
    }
    SizeBiasCheck check;
    check.ks = mc::ks_distance(lhs, mc::EmpiricalDist(std::move(rhs)));
    check.pass = check.ks < opts.threshold;
    return check;
}

} // namespace smoothfix::pitmanyor
