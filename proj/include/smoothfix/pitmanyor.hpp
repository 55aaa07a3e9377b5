#ifndef SMOOTHFIX_PITMANYOR_HPP
#define SMOOTHFIX_PITMANYOR_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "smoothfix/criteria.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/montecarlo.hpp"

namespace smoothfix::pitmanyor {

/// Distribution of the multiplier A restricted to (0, inf); the atom at zero
/// lives in PitmanYorProblem::gamma0.
class NuDist {
public:
    enum class Kind { uniform01, atoms, tabulated };

    static NuDist uniform01();
    static NuDist from_atoms(std::vector<models::Atom> atoms);
    static NuDist tabulated(std::vector<double> xs, std::vector<double> cdf);

    Kind kind() const { return kind_; }
    const std::vector<models::Atom>& atoms() const { return atoms_; }
    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& cdf() const { return cdf_; }

    double sample(Rng& rng) const;
    std::optional<double> exact_mean_log() const; // E log A on (0,inf), closed forms only
    double cdf_at(double x) const;

private:
    Kind kind_ = Kind::uniform01;
    std::vector<models::Atom> atoms_;
    std::vector<double> xs_, cdf_;
};

struct PitmanYorProblem {
    NuDist nu;
    double gamma0 = 0.0; // P(A = 0)
    double m = 1.0;      // target mean of the solution
};

void validate_problem(const PitmanYorProblem& problem);

/// The decay profile whose generalized inverse is the partial inverse moment
/// of A: h_inv(x) = int_(x,inf) z^{-1} L(A)(dz). Named and atomic laws produce
/// exact profiles; tabulated laws go through a log grid of the stated size.
models::DecayProfile nu_to_h(const PitmanYorProblem& problem, std::size_t grid_resolution = 4096);

struct RecoveredNu {
    NuDist nu;
    double gamma0 = 0.0;
};

/// Inverse direction: L(A)(dx) = -lambda x h_inv(dx), plus the defect at zero.
RecoveredNu h_to_nu(const models::DecayProfile& h, double lambda);

/// Negative drift of the log A walk decides existence of a nontrivial solution.
criteria::DriftClass check_existence(const PitmanYorProblem& problem,
                                     const criteria::DriftOptions& opts = {});

struct SolveOptions {
    std::uint64_t replicas = 100000;
    std::uint64_t iterations = 30;
    std::uint64_t seed = 1;
    int workers = 1;
    double tail_tol = 1e-9;
};

/// Runs the shot-noise population recursion with shift m * gamma0 until the
/// pool settles; the result has mean m and solves the size-bias equation.
mc::EmpiricalDist solve_pitman_yor(const PitmanYorProblem& problem, const SolveOptions& opts = {});

struct VerifyOptions {
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    double threshold = 0.02;
};

struct SizeBiasCheck {
    double ks = 1.0;
    bool pass = false;
};

/// Two-sample check of size_bias(mu) against A * size_bias(mu)' + mu'.
SizeBiasCheck verify_size_bias_equation(const mc::EmpiricalDist& mu,
                                        const PitmanYorProblem& problem,
                                        const VerifyOptions& opts = {});

} // namespace smoothfix::pitmanyor

#endif
