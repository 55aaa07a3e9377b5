#include "smoothfix/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "smoothfix/errors.hpp"
#include "smoothfix/parallel.hpp"

namespace smoothfix::models {

namespace {

constexpr double kProbTol = 1e-12;
constexpr double kOverflowGuard = 1e15;

void check_atoms(const std::vector<Atom>& atoms, bool integer_values) {
    if (atoms.empty()) raise(Errc::bad_input, "empty atom list");
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!(a.prob > 0.0)) raise(Errc::bad_input, "atom probabilities must be positive");
        if (integer_values) {
            if (a.value < 1.0 || a.value != std::floor(a.value))
                raise(Errc::bad_input, "count atoms must be integers >= 1");
        } else if (!(a.value > 0.0)) {
            raise(Errc::bad_input, "weight atoms must be positive");
        }
        total += a.prob;
    }
    if (std::fabs(total - 1.0) > kProbTol) raise(Errc::bad_input, "atom probabilities must sum to 1");
}

} // namespace

// ---------------------------------------------------------------------------
// CountDist

CountDist CountDist::from_atoms(std::vector<Atom> atoms) {
    check_atoms(atoms, true);
    CountDist d;
    d.kind_ = Kind::atoms;
    d.atoms_ = std::move(atoms);
    return d;
}

CountDist CountDist::geometric(double q) {
    if (!(q > 0.0 && q < 1.0)) raise(Errc::bad_input, "geometric parameter must lie in (0,1)");
    CountDist d;
    d.kind_ = Kind::geometric;
    d.q_ = q;
    return d;
}

double CountDist::mean() const {
    if (kind_ == Kind::geometric) return 1.0 / (1.0 - q_);
    double m = 0.0;
    for (const auto& a : atoms_) m += a.prob * a.value;
    return m;
}

double CountDist::moment(double p) const {
    if (kind_ == Kind::atoms) {
        double m = 0.0;
        for (const auto& a : atoms_) m += a.prob * std::pow(a.value, p);
        return m;
    }
    // geometric tail decays like q^k; sum until the remainder is negligible
    double sum = 0.0;
    double pk = 1.0 - q_;
    for (std::uint64_t k = 1; k < 100000000ULL; ++k) {
        double term = std::pow(static_cast<double>(k), p) * pk;
        sum += term;
        pk *= q_;
        if (term < sum * 1e-17 && k > 8) break;
    }
    return sum;
}

double CountDist::pgf(double z) const {
    if (kind_ == Kind::geometric) return (1.0 - q_) * z / (1.0 - q_ * z);
    double g = 0.0;
    for (const auto& a : atoms_) g += a.prob * std::pow(z, a.value);
    return g;
}

double CountDist::pgf_derivative(double z) const {
    if (kind_ == Kind::geometric) {
        double d = 1.0 - q_ * z;
        return (1.0 - q_) / (d * d);
    }
    double g = 0.0;
    for (const auto& a : atoms_) g += a.prob * a.value * std::pow(z, a.value - 1.0);
    return g;
}

std::uint64_t CountDist::sample(Rng& rng) const {
    if (kind_ == Kind::geometric) return rng.geometric1(q_);
    double u = rng.uniform();
    double acc = 0.0;
    for (const auto& a : atoms_) {
        acc += a.prob;
        if (u <= acc) return static_cast<std::uint64_t>(a.value);
    }
    return static_cast<std::uint64_t>(atoms_.back().value);
}

std::uint64_t CountDist::sample_size_biased(Rng& rng) const {
    if (kind_ == Kind::geometric) {
        // k P(L=k) is normalized by two independent geometric(0) summands
        auto g0 = [&]() {
            double u = rng.uniform();
            return static_cast<std::uint64_t>(std::floor(std::log(u) / std::log(q_)));
        };
        return 1 + g0() + g0();
    }
    double total = 0.0;
    for (const auto& a : atoms_) total += a.prob * a.value;
    double u = rng.uniform() * total;
    double acc = 0.0;
    for (const auto& a : atoms_) {
        acc += a.prob * a.value;
        if (u <= acc) return static_cast<std::uint64_t>(a.value);
    }
    return static_cast<std::uint64_t>(atoms_.back().value);
}

// ---------------------------------------------------------------------------
// DecayProfile

DecayProfile DecayProfile::exponential(double rate) {
    if (!(rate > 0.0)) raise(Errc::bad_input, "exponential profile needs rate > 0");
    DecayProfile p;
    p.kind_ = Kind::exponential;
    p.rate_ = rate;
    return p;
}

DecayProfile DecayProfile::step(std::vector<double> edges, std::vector<double> levels) {
    if (edges.size() != levels.size() || edges.empty())
        raise(Errc::bad_input, "step profile needs matching nonempty edges/levels");
    double prev_edge = 0.0;
    double prev_level = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!(edges[i] > prev_edge)) raise(Errc::bad_input, "step profile edges must increase from 0");
        if (!(levels[i] > 0.0)) raise(Errc::bad_input, "step profile levels must be positive");
        if (levels[i] > prev_level) raise(Errc::bad_input, "step profile must be nonincreasing");
        prev_edge = edges[i];
        prev_level = levels[i];
    }
    DecayProfile p;
    p.kind_ = Kind::step;
    p.edges_ = std::move(edges);
    p.levels_ = std::move(levels);
    return p;
}

double DecayProfile::operator()(double t) const {
    if (t < 0.0) t = 0.0;
    if (kind_ == Kind::exponential) return std::exp(-rate_ * t);
    double lo = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        if (t >= lo && t < edges_[i]) return levels_[i];
        lo = edges_[i];
    }
    return 0.0;
}

double DecayProfile::inverse(double z) const {
    if (kind_ == Kind::exponential) {
        if (z >= 1.0) return 0.0;
        if (z <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log(z) / rate_;
    }
    if (z >= levels_.front()) return 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (levels_[i] < z) return lo;
        lo = edges_[i];
    }
    return edges_.back();
}

double DecayProfile::integral() const { return power_integral(1.0); }

double DecayProfile::tail_integral(double T) const {
    if (T <= 0.0) return integral();
    if (kind_ == Kind::exponential) return std::exp(-rate_ * T) / rate_;
    double tail = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        double a = std::max(lo, T);
        if (edges_[i] > a) tail += levels_[i] * (edges_[i] - a);
        lo = edges_[i];
    }
    return tail;
}

double DecayProfile::power_integral(double beta) const {
    if (kind_ == Kind::exponential) return 1.0 / (beta * rate_);
    double s = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        s += std::pow(levels_[i], beta) * (edges_[i] - lo);
        lo = edges_[i];
    }
    return s;
}

double DecayProfile::power_log_integral(double beta) const {
    if (kind_ == Kind::exponential) return -1.0 / (beta * beta * rate_);
    double s = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        s += std::pow(levels_[i], beta) * std::log(levels_[i]) * (edges_[i] - lo);
        lo = edges_[i];
    }
    return s;
}

double DecayProfile::horizon(double budget, double max_horizon) const {
    if (budget <= 0.0) raise(Errc::bad_input, "horizon needs a positive budget");
    if (kind_ == Kind::step) return edges_.back();
    if (budget >= integral()) return 0.0;
    double T = std::log(1.0 / (rate_ * budget)) / rate_;
    if (!(T <= max_horizon))
        raise(Errc::horizon_unbounded, "tail budget unreachable below max horizon");
    return T;
}

double DecayProfile::sample_power_density(double beta, Rng& rng) const {
    if (kind_ == Kind::exponential) return rng.exponential(beta * rate_);
    double total = power_integral(beta);
    double u = rng.uniform() * total;
    double lo = 0.0;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
        double seg = std::pow(levels_[i], beta) * (edges_[i] - lo);
        if (u <= seg) return lo + (edges_[i] - lo) * (u / seg);
        u -= seg;
        lo = edges_[i];
    }
    return edges_.back();
}

// ---------------------------------------------------------------------------
// WeightModel

WeightModel WeightModel::fixed_weights(std::vector<double> weights) {
    WeightModel m;
    m.kind_ = Kind::fixed_weights;
    std::sort(weights.begin(), weights.end(), std::greater<>());
    m.weights_ = std::move(weights);
    return m;
}

WeightModel WeightModel::common_random_weight(std::uint64_t count, std::vector<Atom> atoms) {
    WeightModel m;
    m.kind_ = Kind::common_random_weight;
    m.count_ = count;
    m.atoms_ = std::move(atoms);
    return m;
}

WeightModel WeightModel::random_count_fixed_weight(CountDist count, double weight) {
    WeightModel m;
    m.kind_ = Kind::random_count_fixed_weight;
    m.count_dist_ = std::move(count);
    m.weight_value_ = weight;
    return m;
}

WeightModel WeightModel::shot_noise(DecayProfile h, double intensity) {
    WeightModel m;
    m.kind_ = Kind::shot_noise;
    m.profile_ = std::move(h);
    m.intensity_ = intensity;
    return m;
}

std::string WeightModel::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::fixed_weights: os << "fixed_weights(" << weights_.size() << ")"; break;
        case Kind::common_random_weight: os << "common_random_weight(" << count_ << ")"; break;
        case Kind::random_count_fixed_weight: os << "random_count_fixed_weight"; break;
        case Kind::shot_noise: os << "shot_noise"; break;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// validation

void validate_model(const WeightModel& model) {
    switch (model.kind()) {
        case WeightModel::Kind::fixed_weights: {
            const auto& w = model.weights();
            if (w.empty()) raise(Errc::bad_input, "no weights");
            bool all_unit = true;
            for (double x : w) {
                if (!(x > 0.0)) raise(Errc::bad_input, "weights must be strictly positive");
                if (x != 1.0) all_unit = false;
            }
            if (all_unit) raise(Errc::degenerate_weights, "all weights equal 1");
            if (w.size() <= 1) raise(Errc::subcritical_count, "E L <= 1");
            break;
        }
        case WeightModel::Kind::common_random_weight: {
            check_atoms(model.atoms(), false);
            bool all_unit = true;
            for (const auto& a : model.atoms())
                if (a.value != 1.0) all_unit = false;
            if (all_unit) raise(Errc::degenerate_weights, "all weights equal 1");
            if (model.count() <= 1) raise(Errc::subcritical_count, "E L <= 1");
            break;
        }
        case WeightModel::Kind::random_count_fixed_weight: {
            if (!(model.weight_value() > 0.0)) raise(Errc::bad_input, "weight must be positive");
            if (model.weight_value() == 1.0) raise(Errc::degenerate_weights, "all weights equal 1");
            if (!(model.count_dist().mean() > 1.0)) raise(Errc::subcritical_count, "E L <= 1");
            break;
        }
        case WeightModel::Kind::shot_noise: {
            if (!(model.intensity() > 0.0)) raise(Errc::bad_input, "intensity must be positive");
            const auto& h = model.profile();
            if (!(h.integral() > 0.0) || !std::isfinite(h.integral()))
                raise(Errc::bad_input, "profile integral must be positive and finite");
            if (h.kind() == DecayProfile::Kind::step) {
                bool all_unit = true;
                for (double v : h.levels())
                    if (v != 1.0) all_unit = false;
                if (all_unit) raise(Errc::degenerate_weights, "all weights equal 1");
                if (!(model.intensity() * h.edges().back() > 1.0))
                    raise(Errc::subcritical_count, "E L <= 1");
            }
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// sampling realizations

PointSample sample_points(const WeightModel& model, Rng& rng, double tail_tol,
                          double max_horizon) {
    if (!(tail_tol > 0.0)) raise(Errc::bad_input, "tail_tol must be positive");
    PointSample out;
    switch (model.kind()) {
        case WeightModel::Kind::fixed_weights:
            out.weights = model.weights();
            break;
        case WeightModel::Kind::common_random_weight: {
            double u = rng.uniform();
            double acc = 0.0;
            double v = model.atoms().back().value;
            for (const auto& a : model.atoms()) {
                acc += a.prob;
                if (u <= acc) {
                    v = a.value;
                    break;
                }
            }
            out.weights.assign(model.count(), v);
            break;
        }
        case WeightModel::Kind::random_count_fixed_weight: {
            std::uint64_t n = model.count_dist().sample(rng);
            out.weights.assign(n, model.weight_value());
            break;
        }
        case WeightModel::Kind::shot_noise: {
            const auto& h = model.profile();
            double T = h.horizon(tail_tol / model.intensity(), max_horizon);
            double t = 0.0;
            while (true) {
                t += rng.exponential(model.intensity());
                if (t >= T) break;
                double x = h(t);
                if (x > 0.0) out.weights.push_back(x);
            }
            std::sort(out.weights.begin(), out.weights.end(), std::greater<>());
            out.truncation_bound = model.intensity() * h.tail_integral(T);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// moment functionals

namespace {

Estimate mc_over_realizations(const WeightModel& model, const McOptions& opts,
                              double (*fn)(const PointSample&, double), double param,
                              double bound) {
    std::vector<double> vals(opts.budget);
    parallel_for(opts.budget, opts.workers, [&](std::size_t i) {
        Rng rng = Rng::for_replica(opts.seed, i);
        PointSample ps = sample_points(model, rng, opts.tail_tol);
        vals[i] = fn(ps, param);
    });
    Estimate e = Estimate::from_samples(vals);
    e.bound = bound;
    if (!std::isfinite(e.value) || std::fabs(e.value) > kOverflowGuard)
        raise(Errc::divergent, "Monte Carlo estimate exceeded the overflow guard");
    return e;
}

double power_sum(const PointSample& ps, double beta) {
    double s = 0.0;
    for (double x : ps.weights) s += std::pow(x, beta);
    return s;
}

double power_log_sum(const PointSample& ps, double beta) {
    double s = 0.0;
    for (double x : ps.weights) s += std::pow(x, beta) * std::log(x);
    return s;
}

double plain_sum_pow(const PointSample& ps, double p) {
    double s = 0.0;
    for (double x : ps.weights) s += x;
    return std::pow(s, p);
}

double shot_power_tail(const WeightModel& model, double beta, double tail_tol) {
    const auto& h = model.profile();
    double T = h.horizon(tail_tol / model.intensity());
    if (h.kind() == DecayProfile::Kind::step) return 0.0;
    return model.intensity() * std::exp(-beta * h.rate() * T) / (beta * h.rate());
}

} // namespace

Estimate t_beta(const WeightModel& model, double beta, const McOptions& opts) {
    if (!(beta > 0.0)) raise(Errc::bad_input, "beta must be positive");
    if (opts.force_mc)
        return mc_over_realizations(model, opts, power_sum, beta,
                                    model.kind() == WeightModel::Kind::shot_noise
                                        ? shot_power_tail(model, beta, opts.tail_tol)
                                        : 0.0);
    double v = 0.0;
    switch (model.kind()) {
        case WeightModel::Kind::fixed_weights:
            for (double x : model.weights()) v += std::pow(x, beta);
            break;
        case WeightModel::Kind::common_random_weight:
            for (const auto& a : model.atoms()) v += a.prob * std::pow(a.value, beta);
            v *= static_cast<double>(model.count());
            break;
        case WeightModel::Kind::random_count_fixed_weight:
            v = model.count_dist().mean() * std::pow(model.weight_value(), beta);
            break;
        case WeightModel::Kind::shot_noise:
            v = model.intensity() * model.profile().power_integral(beta);
            break;
    }
    if (!std::isfinite(v) || v > kOverflowGuard) raise(Errc::divergent, "t(beta) diverges");
    return Estimate::exact(v);
}

Estimate t_beta_derivative(const WeightModel& model, double beta, const McOptions& opts) {
    if (!(beta > 0.0)) raise(Errc::bad_input, "beta must be positive");
    if (opts.force_mc)
        return mc_over_realizations(model, opts, power_log_sum, beta, 0.0);
    double v = 0.0;
    switch (model.kind()) {
        case WeightModel::Kind::fixed_weights:
            for (double x : model.weights()) v += std::pow(x, beta) * std::log(x);
            break;
        case WeightModel::Kind::common_random_weight:
            for (const auto& a : model.atoms()) v += a.prob * std::pow(a.value, beta) * std::log(a.value);
            v *= static_cast<double>(model.count());
            break;
        case WeightModel::Kind::random_count_fixed_weight:
            v = model.count_dist().mean() * std::pow(model.weight_value(), beta) *
                std::log(model.weight_value());
            break;
        case WeightModel::Kind::shot_noise:
            v = model.intensity() * model.profile().power_log_integral(beta);
            break;
    }
    if (!std::isfinite(v)) raise(Errc::divergent, "t'(beta) diverges");
    return Estimate::exact(v);
}

Estimate sum_weights_moment(const WeightModel& model, double p, const McOptions& opts) {
    if (!(p >= 1.0)) raise(Errc::bad_input, "p must be >= 1");
    if (!opts.force_mc) {
        switch (model.kind()) {
            case WeightModel::Kind::fixed_weights: {
                double s = 0.0;
                for (double x : model.weights()) s += x;
                return Estimate::exact(std::pow(s, p));
            }
            case WeightModel::Kind::common_random_weight: {
                double v = 0.0;
                for (const auto& a : model.atoms())
                    v += a.prob * std::pow(static_cast<double>(model.count()) * a.value, p);
                return Estimate::exact(v);
            }
            case WeightModel::Kind::random_count_fixed_weight:
                return Estimate::exact(model.count_dist().moment(p) *
                                       std::pow(model.weight_value(), p));
            case WeightModel::Kind::shot_noise: {
                // integer moments via Poisson-integral cumulants
                const auto& h = model.profile();
                double lam = model.intensity();
                double k1 = lam * h.power_integral(1.0);
                if (p == 1.0) return Estimate::exact(k1);
                if (p == 2.0) {
                    double k2 = lam * h.power_integral(2.0);
                    return Estimate::exact(k2 + k1 * k1);
                }
                if (p == 3.0) {
                    double k2 = lam * h.power_integral(2.0);
                    double k3 = lam * h.power_integral(3.0);
                    return Estimate::exact(k3 + 3.0 * k2 * k1 + k1 * k1 * k1);
                }
                break; // fall through to Monte Carlo
            }
        }
    }
    double bound = 0.0;
    if (model.kind() == WeightModel::Kind::shot_noise) {
        // discarding expected mass d shifts the p-th moment by about p (E sum)^{p-1} d
        double mean_sum = model.intensity() * model.profile().integral();
        bound = p * std::pow(mean_sum + 1.0, p - 1.0) * opts.tail_tol;
    }
    return mc_over_realizations(model, opts, plain_sum_pow, p, bound);
}

bool condition_d_holds(const WeightModel& model, double beta, const McOptions& opts) {
    Estimate t = t_beta(model, beta, opts);
    if (t.provenance == Provenance::exact) return std::fabs(t.value - 1.0) <= 1e-6;
    return std::fabs(t.value - 1.0) <= 3.0 * t.std_error;
}

void require_condition_d(const WeightModel& model, double beta, const McOptions& opts) {
    if (!condition_d_holds(model, beta, opts))
        raise(Errc::condition_d_violated,
              "t(" + std::to_string(beta) + ") != 1 for " + model.describe());
}

// ---------------------------------------------------------------------------
// size-biased spine node

namespace {

SizeBiasedNode node_from_pool(const WeightModel& model, double beta, Rng& rng,
                              const NodeOptions& opts) {
    std::vector<PointSample> pool(opts.pool);
    std::vector<double> mass(opts.pool);
    double total = 0.0;
    for (std::uint64_t j = 0; j < opts.pool; ++j) {
        pool[j] = sample_points(model, rng, opts.tail_tol);
        mass[j] = power_sum(pool[j], beta);
        total += mass[j];
    }
    if (!(total > 0.0)) raise(Errc::evaluation_failed, "pool carries no mass");
    double u = rng.uniform() * total;
    std::size_t pick = opts.pool - 1;
    double acc = 0.0;
    for (std::size_t j = 0; j < opts.pool; ++j) {
        acc += mass[j];
        if (u <= acc) {
            pick = j;
            break;
        }
    }
    const auto& ps = pool[pick];
    double inner = rng.uniform() * mass[pick];
    double cum = 0.0;
    double chosen = ps.weights.back();
    for (double x : ps.weights) {
        cum += std::pow(x, beta);
        if (inner <= cum) {
            chosen = x;
            break;
        }
    }
    return {std::pow(chosen, beta), mass[pick]};
}

} // namespace

SizeBiasedNode sample_size_biased_node(const WeightModel& model, double beta, Rng& rng,
                                       const NodeOptions& opts) {
    if (!opts.skip_condition_check) require_condition_d(model, beta);
    if (opts.force_pool) return node_from_pool(model, beta, rng, opts);
    switch (model.kind()) {
        case WeightModel::Kind::fixed_weights: {
            double total = 0.0;
            for (double x : model.weights()) total += std::pow(x, beta);
            double u = rng.uniform() * total;
            double acc = 0.0;
            double chosen = model.weights().back();
            for (double x : model.weights()) {
                acc += std::pow(x, beta);
                if (u <= acc) {
                    chosen = x;
                    break;
                }
            }
            return {std::pow(chosen, beta), total};
        }
        case WeightModel::Kind::common_random_weight: {
            double total = 0.0;
            for (const auto& a : model.atoms()) total += a.prob * std::pow(a.value, beta);
            double u = rng.uniform() * total;
            double acc = 0.0;
            double v = model.atoms().back().value;
            for (const auto& a : model.atoms()) {
                acc += a.prob * std::pow(a.value, beta);
                if (u <= acc) {
                    v = a.value;
                    break;
                }
            }
            double vb = std::pow(v, beta);
            return {vb, static_cast<double>(model.count()) * vb};
        }
        case WeightModel::Kind::random_count_fixed_weight: {
            std::uint64_t l = model.count_dist().sample_size_biased(rng);
            double cb = std::pow(model.weight_value(), beta);
            return {cb, static_cast<double>(l) * cb};
        }
        case WeightModel::Kind::shot_noise: {
            // Palm construction: the marked point is an extra arrival with
            // density h^beta, laid over an independent realization.
            const auto& h = model.profile();
            double tstar = h.sample_power_density(beta, rng);
            double m = std::pow(h(tstar), beta);
            PointSample rest = sample_points(model, rng, opts.tail_tol);
            return {m, m + power_sum(rest, beta)};
        }
    }
    raise(Errc::evaluation_failed, "unreachable model kind");
}

} // namespace smoothfix::models
