#include <doctest.h>

#include <cmath>

#include "smoothfix/errors.hpp"
#include "smoothfix/lst.hpp"
#include "smoothfix/montecarlo.hpp"
#include "test_util.hpp"

using namespace smoothfix;
using namespace smoothfix::mc;

TEST_CASE("martingale of a deterministic tree is constant") {
    BrwOptions opts;
    opts.generations = 5;
    opts.replicas = 100;
    auto res = simulate_brw_martingale(models::WeightModel::fixed_weights({0.5, 0.5}), opts);
    for (double w : res.samples) CHECK(w == 1.0);

    opts.generations = 0;
    auto res0 = simulate_brw_martingale(testutil::geometric_model(), opts);
    for (double w : res0.samples) CHECK(w == 1.0);
}

TEST_CASE("martingale mean is one across generations") {
    for (int n : {1, 6, 12}) {
        BrwOptions opts;
        opts.generations = n;
        opts.replicas = 10000;
        opts.seed = 1;
        opts.workers = 4;
        auto res = simulate_brw_martingale(testutil::geometric_model(), opts);
        auto d = res.dist();
        double se = std::sqrt(std::max(d.moment(2.0) - 1.0, 0.1) / 10000.0);
        CHECK(std::fabs(d.mean() - 1.0) <= 4.0 * se);
    }
}

TEST_CASE("deep geometric martingale approaches the exponential law") {
    BrwOptions opts;
    opts.generations = 12;
    opts.replicas = 10000;
    opts.seed = 1;
    opts.workers = 4;
    auto res = simulate_brw_martingale(testutil::geometric_model(), opts);
    auto d = res.dist();
    CHECK(res.censored == 0);
    CHECK(d.mean() == doctest::Approx(1.0).epsilon(0.03));
    CHECK(d.moment(2.0) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(ks_distance(d, NamedLaw::exponential(1.0)) < 0.02);
}

TEST_CASE("population caps censor instead of hanging") {
    BrwOptions opts;
    opts.generations = 12;
    opts.replicas = 50;
    opts.pop_cap = 20000;
    opts.seed = 3;
    auto res = simulate_brw_martingale(testutil::geometric_model(), opts);
    CHECK(res.censored > 0);
    CHECK(res.samples.size() >= 1);
    CHECK(res.samples.size() + res.censored == 50);
}

TEST_CASE("spine perpetuity of the deterministic model is exactly one") {
    SpineOptions opts;
    opts.depth = 60;
    opts.replicas = 200;
    auto res = simulate_spine_perpetuity(models::WeightModel::fixed_weights({0.5, 0.5}), opts);
    for (double v : res.v) CHECK(v == 1.0);
    for (std::size_t i = 0; i < res.v.size(); ++i)
        CHECK(res.v1[i] - res.v2[i] == res.v[i]);
}

TEST_CASE("spine perpetuity at depth zero is the first node") {
    SpineOptions opts;
    opts.depth = 0;
    opts.replicas = 20000;
    opts.seed = 2;
    auto res = simulate_spine_perpetuity(testutil::geometric_model(), opts);
    double mean = 0.0;
    for (double v : res.v) mean += v;
    mean /= static_cast<double>(res.v.size());
    CHECK(mean == doctest::Approx(1.5).epsilon(0.02)); // E of the size-biased sum
}

TEST_CASE("geometric spine perpetuity matches the second-moment oracle") {
    SpineOptions opts;
    opts.depth = 60;
    opts.replicas = 100000;
    opts.seed = 1;
    opts.workers = 4;
    auto res = simulate_spine_perpetuity(testutil::geometric_model(), opts);
    double mean = 0.0;
    for (double v : res.v) mean += v;
    mean /= static_cast<double>(res.v.size());
    CHECK(mean == doctest::Approx(2.0).epsilon(0.025));
    CHECK(res.v1_mean_stable);
}

TEST_CASE("population step: deterministic cases") {
    auto pool = EmpiricalDist::point_mass(3.0, 1000);
    StepOptions opts;
    opts.replicas = 1000;
    auto out = population_step(models::WeightModel::fixed_weights({0.5, 0.5}), pool, opts);
    for (double x : out.samples()) CHECK(x == 3.0);
    CHECK_THROWS_AS(EmpiricalDist(std::vector<double>{}), Error);
}

TEST_CASE("population step holds the exponential fixed point") {
    Rng rng(4);
    auto pool = EmpiricalDist::exponential(1.0, 100000, rng);
    StepOptions opts;
    opts.replicas = 100000;
    opts.seed = 5;
    opts.workers = 4;
    for (const auto& model : {testutil::geometric_model(), testutil::exp_shot_noise()}) {
        auto out = population_step(model, pool, opts);
        CHECK(ks_distance(out, NamedLaw::exponential(1.0)) < 0.02);
        CHECK(out.mean() == doctest::Approx(pool.mean()).epsilon(0.02));
    }
}

TEST_CASE("population iteration reaches and keeps the fixed point") {
    IterateOptions opts;
    opts.replicas = 100000;
    opts.iterations = 30;
    opts.seed = 6;
    opts.workers = 4;
    auto run = iterate_population(testutil::geometric_model(),
                                  EmpiricalDist::point_mass(1.0, 100000), opts);
    CHECK(run.pool.mean() == doctest::Approx(1.0).epsilon(0.03));
    CHECK(ks_distance(run.pool, NamedLaw::exponential(1.0)) < 0.03);
    // consecutive-pool distances settle near the resampling noise floor
    CHECK(run.ks_trace.back() < 0.02);

    auto fixed = iterate_population(models::WeightModel::fixed_weights({0.5, 0.5}),
                                    EmpiricalDist::point_mass(1.0, 10000), opts);
    for (double x : fixed.pool.samples()) CHECK(x == 1.0);
}

TEST_CASE("the zero-drift model degenerates instead of settling") {
    IterateOptions opts;
    opts.replicas = 10000;
    opts.iterations = 60;
    opts.seed = 7;
    bool collapsed = false;
    double median = 1.0;
    try {
        auto run = iterate_population(testutil::oscillating_model(),
                                      EmpiricalDist::point_mass(1.0, 10000), opts);
        median = run.pool.quantile(0.5);
    } catch (const Error& e) {
        collapsed = e.code() == Errc::mean_collapse;
    }
    CHECK((collapsed || median < 0.45));
}

TEST_CASE("shot-noise sampling: fixed point, shifts, and empty supports") {
    Rng rng(8);
    auto pool = EmpiricalDist::exponential(1.0, 100000, rng);
    ShotNoiseOptions opts;
    opts.replicas = 100000;
    opts.seed = 9;
    opts.workers = 4;
    auto out = sample_shot_noise(models::DecayProfile::exponential(1.0), 1.0, pool, 0.0, opts);
    CHECK(ks_distance(out, NamedLaw::exponential(1.0)) < 0.02);

    opts.replicas = 10000;
    auto shifted = sample_shot_noise(models::DecayProfile::exponential(1.0), 1.0,
                                     EmpiricalDist::point_mass(0.0, 100), 0.7, opts);
    for (double x : shifted.samples()) CHECK(x == 0.7);

    auto tiny = sample_shot_noise(models::DecayProfile::step({1e-9}, {1.0}), 1.0, pool, 0.0, opts);
    CHECK(tiny.quantile(0.999) == 0.0);
}

TEST_CASE("size biasing reweights correctly") {
    Rng rng(10);
    auto exp1 = EmpiricalDist::exponential(1.0, 100000, rng);
    auto biased = size_bias(exp1, rng, 100000);
    CHECK(biased.mean() == doctest::Approx(2.0).epsilon(0.025));
    CHECK(ks_distance(biased, NamedLaw::gamma(2.0, 1.0)) < 0.02);

    auto point = size_bias(EmpiricalDist::point_mass(0.7, 100), rng, 1000);
    for (double x : point.samples()) CHECK(x == 0.7);

    std::vector<double> two;
    for (int i = 0; i < 10000; ++i) two.push_back(i % 2 == 0 ? 1.0 : 3.0);
    auto biased2 = size_bias(EmpiricalDist(std::move(two)), rng, 100000);
    double p3 = 0.0;
    for (double x : biased2.samples()) p3 += x == 3.0 ? 1.0 : 0.0;
    CHECK(p3 / 100000.0 == doctest::Approx(0.75).epsilon(0.02));

    CHECK_THROWS_AS(size_bias(EmpiricalDist::point_mass(0.0, 10), rng, 10), Error);
}

TEST_CASE("Kolmogorov-Smirnov distances") {
    Rng rng(12);
    auto a = EmpiricalDist::exponential(1.0, 100000, rng);
    CHECK(ks_distance(a, a) == 0.0);
    CHECK(ks_distance(EmpiricalDist::point_mass(0.0, 50), EmpiricalDist::point_mass(1.0, 70)) == 1.0);
    CHECK(ks_distance(a, NamedLaw::exponential(1.0)) < 0.015);
    CHECK(ks_distance(EmpiricalDist::point_mass(2.0, 10), NamedLaw::point_mass(2.0)) == 0.0);
}

TEST_CASE("positive stable draws carry the right transform") {
    Rng rng(14);
    for (double alpha : {0.3, 0.5, 0.7}) {
        auto s = sample_positive_stable(alpha, 100000, rng);
        for (double x : {0.1, 1.0, 10.0})
            CHECK(s.laplace(x) == doctest::Approx(std::exp(-std::pow(x, alpha))).epsilon(0.015));
    }
    // near alpha = 1 the law concentrates at 1
    auto tight = sample_positive_stable(0.99, 100000, rng);
    CHECK(tight.quantile(0.5) == doctest::Approx(1.0).epsilon(0.25));
    // alpha = 0.5 is the inverse-chi-square law: P(S > x) = erf-free closed form
    // 2 Phi((2x)^{-1/2}) - 1 ~ (pi x)^{-1/2}; check the tail at two decades
    auto heavy = sample_positive_stable(0.5, 100000, rng);
    CHECK(heavy.tail(100.0) == doctest::Approx(0.0564).epsilon(0.08));
    CHECK(heavy.tail(10000.0) == doctest::Approx(0.00564).epsilon(0.25));
}

TEST_CASE("worker count never changes the samples") {
    StepOptions one;
    one.replicas = 20000;
    one.seed = 33;
    one.workers = 1;
    StepOptions eight = one;
    eight.workers = 8;
    auto pool = EmpiricalDist::point_mass(1.0, 1000);
    auto a = population_step(testutil::geometric_model(), pool, one);
    auto b = population_step(testutil::geometric_model(), pool, eight);
    REQUIRE(a.samples().size() == b.samples().size());
    for (std::size_t i = 0; i < a.samples().size(); ++i) CHECK(a.samples()[i] == b.samples()[i]);

    BrwOptions b1;
    b1.generations = 8;
    b1.replicas = 2000;
    b1.seed = 44;
    b1.workers = 1;
    BrwOptions b8 = b1;
    b8.workers = 8;
    auto r1 = simulate_brw_martingale(testutil::geometric_model(), b1);
    auto r8 = simulate_brw_martingale(testutil::geometric_model(), b8);
    REQUIRE(r1.samples.size() == r8.samples.size());
    for (std::size_t i = 0; i < r1.samples.size(); ++i) CHECK(r1.samples[i] == r8.samples[i]);
}

TEST_CASE("spine, size-biased pool, and transform grids tell one story") {
    // size biasing the fixed-point pool reproduces the spine perpetuity mean
    IterateOptions iopts;
    iopts.replicas = 100000;
    iopts.iterations = 25;
    iopts.seed = 15;
    iopts.workers = 4;
    auto pool = iterate_population(testutil::geometric_model(),
                                   EmpiricalDist::point_mass(1.0, 100000), iopts)
                    .pool;
    Rng rng(16);
    auto biased = size_bias(pool, rng, 100000);
    CHECK(biased.mean() == doctest::Approx(2.0).epsilon(0.05));

    // one sample-level step matches one transform-level step
    auto grid = lst::LstGrid::from_samples(pool);
    auto stepped_grid = lst::picard_step(grid, testutil::geometric_model());
    StepOptions sopts;
    sopts.replicas = 100000;
    sopts.seed = 17;
    sopts.workers = 4;
    auto stepped_pool = population_step(testutil::geometric_model(), pool, sopts);
    double sup = 0.0;
    for (std::size_t i = 0; i < stepped_grid.args().size(); ++i)
        sup = std::max(sup, std::fabs(stepped_grid.values()[i] -
                                      stepped_pool.laplace(stepped_grid.args()[i])));
    CHECK(sup < 0.01);
}
