// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Budgets and tolerances are pinned here; seeds are fixed so the run is
// reproducible end to end.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "smoothfix/criteria.hpp"
#include "smoothfix/errors.hpp"
#include "smoothfix/io.hpp"
#include "smoothfix/lst.hpp"
#include "smoothfix/models.hpp"
#include "smoothfix/montecarlo.hpp"
#include "smoothfix/pitmanyor.hpp"
#include "smoothfix/tails.hpp"

namespace fs = std::filesystem;
using namespace smoothfix;
using io::json;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail) {
    std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double now_s() {
    static auto start = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

models::WeightModel geometric_model() {
    return models::WeightModel::random_count_fixed_weight(models::CountDist::geometric(0.5), 0.5);
}

models::WeightModel two_point_model() {
    return models::WeightModel::common_random_weight(
        2, {{4.0 / 3.0, 9.0 / 34.0}, {0.2, 25.0 / 34.0}});
}

models::WeightModel oscillating_model() {
    double a = 2.0 + std::sqrt(3.0);
    double p = (2.0 - std::sqrt(3.0)) / 4.0;
    return models::WeightModel::common_random_weight(2, {{a, p}, {1.0 / a, 1.0 - p}});
}

models::WeightModel exp_shot_noise() {
    return models::WeightModel::shot_noise(models::DecayProfile::exponential(1.0), 1.0);
}

double sup_vs(const lst::LstGrid& g, const std::function<double(double)>& target) {
    double sup = 0.0;
    for (std::size_t i = 0; i < g.args().size(); ++i)
        sup = std::max(sup, std::fabs(g.values()[i] - target(g.args()[i])));
    return sup;
}

// 1. Picard iteration from e^{-s} reaches the exponential fixed point.
void criterion_1() {
    double t0 = now_s();
    lst::IterateLstOptions opts;
    opts.max_iter = 50;
    opts.step.mc_budget = 10000;
    opts.step.seed = 1;
    auto run = lst::picard_iterate(lst::LstGrid::point_mass(1.0), geometric_model(), opts);
    double sup = sup_vs(run.grid, [](double s) { return 1.0 / (1.0 + s); });
    double dt = now_s() - t0;
    std::ostringstream os;
    os << "sup error " << sup << " after " << run.iterations << " iterations, " << dt << " s";
    report(1, sup < 1e-3 && dt < 30.0, "exponential fixed point via Picard iteration", os.str());
}

// 2. The infinite-summand flagship: exact Poisson step and the sample recursion.
void criterion_2() {
    auto cauchy = lst::LstGrid::from_function([](double s) { return 1.0 / (1.0 + s); });
    auto stepped = lst::picard_step(cauchy, exp_shot_noise());
    double sup = sup_vs(stepped, [](double s) { return 1.0 / (1.0 + s); });

    Rng rng(2);
    auto pool = mc::EmpiricalDist::exponential(1.0, 100000, rng);
    mc::StepOptions sopts;
    sopts.replicas = 100000;
    sopts.seed = 2;
    sopts.workers = 4;
    auto out = mc::population_step(exp_shot_noise(), pool, sopts);
    double ks = mc::ks_distance(out, mc::NamedLaw::exponential(1.0));
    std::ostringstream os;
    os << "Poisson-formula sup " << sup << ", population KS " << ks;
    report(2, sup < 1e-6 && ks < 0.02, "shot-noise fixed point", os.str());
}

// 3. The spine perpetuity reproduces the size-biased second moment.
void criterion_3() {
    mc::SpineOptions opts;
    opts.depth = 60;
    opts.replicas = 100000;
    opts.seed = 1;
    opts.workers = 4;
    auto res = mc::simulate_spine_perpetuity(geometric_model(), opts);
    double mean = 0.0;
    for (double v : res.v) mean += v;
    mean /= static_cast<double>(res.v.size());
    std::ostringstream os;
    os << "E V = " << mean;
    report(3, std::fabs(mean - 2.0) <= 0.05, "spine perpetuity mean", os.str());
}

// 4. The additive martingale at generation 12.
void criterion_4() {
    double t0 = now_s();
    mc::BrwOptions opts;
    opts.generations = 12;
    opts.replicas = 10000;
    opts.seed = 1;
    opts.workers = 4;
    auto res = mc::simulate_brw_martingale(geometric_model(), opts);
    auto d = res.dist();
    double ks = mc::ks_distance(d, mc::NamedLaw::exponential(1.0));
    double dt = now_s() - t0;
    std::ostringstream os;
    os << "mean " << d.mean() << ", second moment " << d.moment(2.0) << ", KS " << ks << ", " << dt
       << " s";
    report(4,
           std::fabs(d.mean() - 1.0) <= 0.03 && std::fabs(d.moment(2.0) - 2.0) <= 0.1 &&
               ks < 0.02 && dt < 60.0,
           "branching martingale at generation 12", os.str());
}

// 5. Both normalization roots of the two-point model.
void criterion_5() {
    auto roots = criteria::solve_beta_roots(two_point_model(), 8.0);
    bool pass = roots.roots.size() == 2 && std::fabs(roots.roots[0] - 1.0) < 1e-9 &&
                std::fabs(roots.roots[1] - 2.0) < 1e-9 && roots.residuals[0] < 1e-9 &&
                roots.residuals[1] < 1e-9;
    std::ostringstream os;
    os << "roots";
    for (std::size_t i = 0; i < roots.roots.size(); ++i)
        os << " " << roots.roots[i] << " (residual " << roots.residuals[i] << ")";
    report(5, pass, "normalization roots", os.str());
}

// 6. Existence verdicts are stable across 100 seeds for all three models.
void criterion_6() {
    int good = 0;
    bool labels_ok = true;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        criteria::VerdictOptions opts;
        opts.budget = 20000;
        opts.seed = seed;
        auto geo = criteria::existence_verdict(geometric_model(), opts);
        auto shot = criteria::existence_verdict(exp_shot_noise(), opts);
        auto osc = criteria::existence_verdict(oscillating_model(), opts);
        bool ok = geo.exists && geo.condition_case == 'a' &&
                  std::fabs(geo.alpha.value_or(0) - 1.0) < 1e-9 && shot.exists &&
                  shot.condition_case == 'a' && std::fabs(shot.alpha.value_or(0) - 1.0) < 1e-9 &&
                  !osc.exists;
        if (ok) ++good;
        else labels_ok = false;
    }
    std::ostringstream os;
    os << good << "/100 seeds agree";
    report(6, good == 100 && labels_ok, "existence verdicts", os.str());
}

// 7. Tail behaviour of the quadratic-tail model.
void criterion_7() {
    auto two = two_point_model();
    mc::IterateOptions iopts;
    iopts.replicas = 1000000;
    iopts.iterations = 150;
    iopts.seed = 1;
    iopts.workers = 8;
    iopts.track_ks = false;
    auto run = mc::iterate_population(two, mc::EmpiricalDist::point_mass(1.0, 1000000), iopts);
    auto pool = run.pool.scaled(1.0 / run.pool.mean());

    auto hill = tails::hill_estimate(pool, 0.0005);
    auto plateau = tails::plateau_check(pool, 2.0);
    tails::CbOptions copts;
    copts.seed = 1;
    copts.workers = 8;
    auto rep = tails::compute_cb(two, pool, 2.0, copts);
    double agree = std::fabs(rep.cb_formula - rep.cb_empirical) /
                   std::max(rep.cb_formula, rep.cb_empirical);
    std::ostringstream os;
    os << "Hill " << hill.index << ", plateau spread " << plateau.spread << ", cb " << rep.cb_formula
       << " vs " << rep.cb_empirical << " (" << agree << "), dominance slack "
       << rep.dominance_violation;
    report(7,
           std::fabs(hill.index - 2.0) <= 0.15 && plateau.spread <= 0.25 && agree <= 0.30 &&
               rep.dominance_violation == 0.0,
           "quadratic tail behaviour", os.str());
}

// 8. The moment criterion at p = 2, with the fixed-point second moment.
void criterion_8() {
    auto geo = tails::check_moment_condition(geometric_model(), 2.0);
    mc::IterateOptions iopts;
    iopts.replicas = 100000;
    iopts.iterations = 30;
    iopts.seed = 3;
    iopts.workers = 4;
    iopts.track_ks = false;
    auto pool = mc::iterate_population(geometric_model(),
                                       mc::EmpiricalDist::point_mass(1.0, 100000), iopts)
                    .pool;
    double m2 = pool.moment(2.0);
    auto two = tails::check_moment_condition(two_point_model(), 2.0);
    std::ostringstream os;
    os << "geometric verdict " << geo.verdict << " with E W^2 = " << m2 << ", two-point verdict "
       << two.verdict;
    report(8, geo.verdict && geo.lp_convergence && std::fabs(m2 - 2.0) <= 0.1 && !two.verdict,
           "moment condition at p = 2", os.str());
}

// 9. The smoothing step contracts the minimal metric at rate t(p).
void criterion_9() {
    Rng rng(9);
    auto nu1 = mc::EmpiricalDist::exponential(1.0, 20000, rng);
    auto nu2 = mc::EmpiricalDist::point_mass(1.0, 20000);
    int good = 0;
    double worst_margin = -1.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        bool ok = true;
        for (double p : {1.2, 1.5, 1.8}) {
            lst::ContractionOptions opts;
            opts.replicas = 20000;
            opts.seed = seed;
            double ratio = lst::contraction_ratio(geometric_model(), nu1, nu2, p, opts);
            double bound = models::t_beta(geometric_model(), p).value + 0.05;
            worst_margin = std::max(worst_margin, ratio - bound);
            if (!(ratio <= bound)) ok = false;
        }
        if (ok) ++good;
    }
    std::ostringstream os;
    os << good << "/20 seeds, worst margin " << worst_margin;
    report(9, good == 20, "metric contraction", os.str());
}

// 10. The stable transformation, on grids and on samples.
void criterion_10() {
    Rng rng(10);
    auto mixed = lst::stable_transform(mc::EmpiricalDist::point_mass(1.0, 100000), 0.5, rng);
    double worst = 0.0;
    for (double s : {0.1, 0.5, 1.0, 2.0, 10.0})
        worst = std::max(worst, std::fabs(mixed.laplace(s) - std::exp(-std::sqrt(s))));

    auto grid = lst::stable_transform(lst::LstGrid::point_mass(1.0), 0.5);
    auto fit = lst::estimate_alpha_m(grid);

    auto base = lst::LstGrid::from_function([](double s) { return 1.0 / (1.0 + s); });
    lst::LstGrid interp(base.args(), base.values());
    double round = 0.0;
    for (double alpha : {0.3, 0.5, 0.7}) {
        auto back = lst::inverse_stable_transform(lst::stable_transform(interp, alpha), alpha);
        for (std::size_t i = 0; i < base.args().size(); ++i)
            round = std::max(round, std::fabs(back(base.args()[i]) - base.values()[i]));
    }
    std::ostringstream os;
    os << "sample transform off by " << worst << ", fit (" << fit.alpha << ", " << fit.m
       << "), round trip " << round;
    report(10,
           worst < 0.01 && std::fabs(fit.alpha - 0.5) <= 0.02 && std::fabs(fit.m - 1.0) <= 0.05 &&
               round < 1e-6,
           "stable transformation", os.str());
}

// 11. The Pitman-Yor correspondence end to end.
void criterion_11() {
    pitmanyor::PitmanYorProblem problem;
    problem.nu = pitmanyor::NuDist::uniform01();
    problem.m = 1.0;

    auto h = pitmanyor::nu_to_h(problem);
    double h_err = 0.0;
    for (double t : {0.1, 1.0, 5.0, 12.0}) h_err = std::max(h_err, std::fabs(h(t) - std::exp(-t)));
    auto rec = pitmanyor::h_to_nu(h, 1.0);
    double rt = std::fabs(rec.gamma0);
    for (double x : {0.1, 0.5, 0.9})
        rt = std::max(rt, std::fabs(rec.nu.cdf_at(x) - problem.nu.cdf_at(x)));

    double worst_ks = 0.0;
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        pitmanyor::SolveOptions sopts;
        sopts.replicas = 100000;
        sopts.iterations = 30;
        sopts.seed = seed;
        sopts.workers = 4;
        auto mu = pitmanyor::solve_pitman_yor(problem, sopts);
        worst_ks = std::max(worst_ks, mc::ks_distance(mu, mc::NamedLaw::exponential(1.0)));
        for (std::uint64_t vs = 1; vs <= 4; ++vs) {
            pitmanyor::VerifyOptions vopts;
            vopts.samples = 100000;
            vopts.seed = 1000 * seed + vs;
            if (pitmanyor::verify_size_bias_equation(mu, problem, vopts).pass) ++good;
        }
    }
    std::ostringstream os;
    os << "h off by " << h_err << ", round trip " << rt << ", worst KS " << worst_ks << ", "
       << good << "/20 equation checks";
    report(11, h_err < 1e-12 && rt < 1e-9 && worst_ks < 0.03 && good == 20,
           "Pitman-Yor correspondence", os.str());
}

// 12. Regular variation of 1 - phi at the origin.
void criterion_12() {
    lst::IterateLstOptions opts;
    opts.max_iter = 60;
    auto run = lst::picard_iterate(lst::LstGrid::point_mass(1.0), geometric_model(), opts);
    auto fit1 = criteria::check_regular_variation(run.grid, 1.0);
    auto transformed = lst::stable_transform(run.grid, 0.5);
    auto fit2 = criteria::check_regular_variation(transformed, 0.5);
    std::ostringstream os;
    os << "exponents " << fit1.exponent << " and " << fit2.exponent;
    report(12, std::fabs(fit1.exponent - 1.0) <= 0.02 && std::fabs(fit2.exponent - 0.5) <= 0.02,
           "regular variation of the transform", os.str());
}

// 13. Byte-identical outputs across worker counts, through the CLI.
void criterion_13() {
    fs::path dir = fs::temp_directory_path() / "smoothfix_acceptance_13";
    fs::remove_all(dir);
    fs::create_directories(dir);

    json geo = {{"kind", "random_count_fixed_weight"},
                {"count", {{"geometric", {{"q", 0.5}}}}},
                {"weight", 0.5}};
    json two = {{"kind", "common_random_weight"},
                {"count", 2},
                {"atoms", json::array({{{"value", 4.0 / 3.0}, {"prob", 9.0 / 34.0}},
                                       {{"value", 0.2}, {"prob", 25.0 / 34.0}}})}};
    std::vector<json> configs = {
        {{"model", geo},
         {"command", "criteria"},
         {"seed", 5},
         {"budgets", {{"mc_budget", 20000}}}},
        {{"model", geo},
         {"command", "simulate"},
         {"seed", 5},
         {"parameters", {{"generations", 8}}},
         {"budgets", {{"replicas", 5000}}}},
        {{"model", two},
         {"command", "tails"},
         {"seed", 5},
         {"budgets", {{"replicas", 20000}, {"iterations", 15}}}},
    };

    bool all_ok = true;
    std::string detail;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        fs::path cfg = dir / ("config" + std::to_string(c) + ".json");
        io::write_text_file(cfg.string(), configs[c].dump(2));
        fs::path out1 = dir / ("out" + std::to_string(c) + "_w1");
        fs::path out8 = dir / ("out" + std::to_string(c) + "_w8");
        std::string base = std::string(SMOOTHFIX_BIN) + " run " + cfg.string();
        int rc1 = std::system((base + " --workers 1 --out " + out1.string() + " >/dev/null 2>&1").c_str());
        int rc8 = std::system((base + " --workers 8 --out " + out8.string() + " >/dev/null 2>&1").c_str());
        if (!WIFEXITED(rc1) || WEXITSTATUS(rc1) != 0 || !WIFEXITED(rc8) || WEXITSTATUS(rc8) != 0) {
            all_ok = false;
            detail += configs[c].at("command").get<std::string>() + ":run-failed ";
            continue;
        }
        for (const auto& entry : fs::directory_iterator(out1)) {
            std::ifstream f1(entry.path(), std::ios::binary);
            std::ifstream f8(out8 / entry.path().filename(), std::ios::binary);
            std::stringstream s1, s8;
            s1 << f1.rdbuf();
            s8 << f8.rdbuf();
            if (s1.str() != s8.str() || s1.str().empty()) {
                all_ok = false;
                detail += entry.path().filename().string() + ":differs ";
            }
        }
    }
    if (detail.empty()) detail = "criteria, simulate, tails outputs identical at 1 vs 8 workers";
    report(13, all_ok, "deterministic outputs across workers", detail);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
