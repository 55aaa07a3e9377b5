#include <doctest.h>

#include <cmath>

#include "smoothfix/criteria.hpp"
#include "smoothfix/errors.hpp"
#include "test_util.hpp"

using namespace smoothfix;
using namespace smoothfix::criteria;

TEST_CASE("beta roots: single root of the geometric model") {
    auto roots = solve_beta_roots(testutil::geometric_model(), 5.0);
    REQUIRE(roots.roots.size() == 1);
    CHECK(roots.roots[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(roots.residuals[0] < 1e-9);
}

TEST_CASE("beta roots: both roots of the two-point model") {
    auto roots = solve_beta_roots(testutil::two_point_model(), 5.0);
    REQUIRE(roots.roots.size() == 2);
    CHECK(roots.roots[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(roots.roots[1] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(roots.residuals[0] < 1e-9);
    CHECK(roots.residuals[1] < 1e-9);
}

TEST_CASE("beta roots: tangency and rejection") {
    auto tangent = solve_beta_roots(testutil::oscillating_model(), 8.0);
    REQUIRE(tangent.roots.size() == 1);
    CHECK(tangent.roots[0] == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(solve_beta_roots(models::WeightModel::fixed_weights({1.0, 1.0}), 5.0), Error);
    // weights above one keep t above 1 on the whole bracket
    CHECK_THROWS_AS(solve_beta_roots(models::WeightModel::fixed_weights({1.5, 1.5}), 8.0), Error);
    // small equal weights still cross 1: 2 * 0.2^beta = 1
    auto small = solve_beta_roots(models::WeightModel::fixed_weights({0.2, 0.2}), 8.0);
    REQUIRE(small.roots.size() == 1);
    CHECK(small.roots[0] == doctest::Approx(std::log(2.0) / std::log(5.0)).epsilon(1e-10));
}

TEST_CASE("drift classification on closed-form steps") {
    DriftOptions opts;
    opts.budget = 100000;
    opts.seed = 3;

    auto negative = classify_drift([](Rng&) { return -std::log(2.0); }, opts);
    CHECK(negative.verdict == Drift::negative);
    CHECK(negative.mean_log == doctest::Approx(-0.6931).epsilon(1e-3));

    auto oscillating = classify_drift([](Rng& r) { return r.uniform() < 0.5 ? 1.0 : -1.0; }, opts);
    CHECK(oscillating.verdict == Drift::oscillating);

    auto loguniform = classify_drift([](Rng& r) { return std::log(r.uniform()); }, opts);
    CHECK(loguniform.verdict == Drift::negative);
    CHECK(loguniform.mean_log == doctest::Approx(-1.0).epsilon(0.02));

    DriftOptions exact = opts;
    exact.exact_mean = 0.0;
    CHECK(classify_drift({}, exact).verdict == Drift::oscillating);
    exact.exact_mean = -0.1;
    CHECK(classify_drift({}, exact).verdict == Drift::negative);
}

TEST_CASE("drift classification with heavy one-sided tails") {
    DriftOptions opts;
    opts.budget = 100000;
    opts.seed = 5;
    // E R^- = inf, E R^+ finite: straight to minus infinity
    auto neg = classify_drift([](Rng& r) { return -r.pareto(0.5) + 1.0; }, opts);
    CHECK(neg.verdict == Drift::negative);
    CHECK(neg.mean_log == -std::numeric_limits<double>::infinity());

    // both one-sided means diverge, the negative side much heavier:
    // the Kesten-Maller statistic stabilizes downward
    auto both = classify_drift(
        [](Rng& r) { return r.uniform() < 0.5 ? -r.pareto(0.35) : r.pareto(0.6); }, opts);
    CHECK(both.verdict == Drift::negative);
    CHECK(both.erickson.has_value());
}

TEST_CASE("integral test on point masses") {
    // R == -1: the inner integral is min(u, 1)
    std::vector<double> r(1000, -1.0);
    auto exact_tail = [](double y) { return y <= 1.0 ? 1.0 : 0.0; };

    std::vector<double> at_e2(64, std::exp(2.0));
    auto ir = compute_ir(r, at_e2);
    CHECK(ir.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(ir.finite);
    auto ir_exact = compute_ir(std::vector<double>{}, at_e2, exact_tail);
    CHECK(ir_exact.value == doctest::Approx(2.0).epsilon(1e-6));

    std::vector<double> at_sqrt_e(64, std::exp(0.5));
    CHECK(compute_ir(r, at_sqrt_e).value == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<double> below_one{0.2, 0.5, 0.9, 1.0};
    auto zero = compute_ir(r, below_one);
    CHECK(zero.value == 0.0);
    CHECK(zero.finite);
}

TEST_CASE("integral test is monotone on point masses") {
    std::vector<double> r(1000, -1.0);
    double prev = 0.0;
    for (double x : {1.5, 2.0, 4.0, 10.0, 100.0}) {
        std::vector<double> sigma(32, x);
        double v = compute_ir(r, sigma).value;
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
}

TEST_CASE("existence verdicts for the reference models") {
    VerdictOptions opts;
    opts.budget = 40000;

    auto geo = existence_verdict(testutil::geometric_model(), opts);
    CHECK(geo.exists);
    CHECK(geo.condition_case == 'a');
    CHECK(geo.alpha.value() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(geo.drift.verdict == Drift::negative);
    CHECK(geo.drift.mean_log == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK(geo.i_r_sigma.finite);
    CHECK(geo.xlogx.has_value());

    auto shot = existence_verdict(testutil::exp_shot_noise(), opts);
    CHECK(shot.exists);
    CHECK(shot.condition_case == 'a');
    CHECK(shot.alpha.value() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(shot.drift.mean_log == doctest::Approx(-1.0).epsilon(1e-9));

    auto osc = existence_verdict(testutil::oscillating_model(), opts);
    CHECK_FALSE(osc.exists);
    CHECK(osc.drift.verdict == Drift::oscillating);
    CHECK(osc.condition_case == '-');
    CHECK_FALSE(osc.alpha.has_value());
}

TEST_CASE("sampled drift stays negative across 100 seeds when the mean is") {
    int good = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        DriftOptions opts;
        opts.budget = 10000;
        opts.seed = seed;
        auto d = classify_drift([](Rng& r) { return std::log(r.uniform()); }, opts);
        if (d.verdict == Drift::negative) ++good;
    }
    CHECK(good >= 99);
}

TEST_CASE("verdict booleans are seed-invariant") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        VerdictOptions opts;
        opts.budget = 20000;
        opts.seed = seed;
        CHECK(existence_verdict(testutil::geometric_model(), opts).exists);
        CHECK_FALSE(existence_verdict(testutil::oscillating_model(), opts).exists);
    }
}

TEST_CASE("regular variation fits the transform exponent") {
    auto cauchy = lst::LstGrid::from_function([](double s) { return 1.0 / (1.0 + s); });
    auto fit = check_regular_variation(cauchy, 1.0);
    CHECK(fit.exponent == doctest::Approx(1.0).epsilon(0.02));

    auto halfstable = lst::LstGrid::from_function([](double s) { return std::exp(-std::sqrt(s)); });
    CHECK(check_regular_variation(halfstable, 0.5).exponent == doctest::Approx(0.5).epsilon(0.04));

    auto point = lst::LstGrid::from_function([](double s) { return std::exp(-s); });
    CHECK(check_regular_variation(point, 1.0).exponent == doctest::Approx(1.0).epsilon(0.02));

    // transforms that are flat near zero cannot be fitted
    auto flat = lst::LstGrid::from_function([](double s) { return s < 1.0 ? 1.0 : 1.0 / s; });
    CHECK_THROWS_AS(check_regular_variation(flat, 1.0), Error);
}
