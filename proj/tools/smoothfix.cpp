// Batch front end: reads a scenario config, dispatches to the computational
// modules, and writes reproducible reports (JSON + CSV) into the output
// directory. Exit codes: 0 success, 1 the math said no, 2 config/IO trouble.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

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

constexpr const char* kVersion = "0.1.0";

struct Budgets {
    std::uint64_t replicas = 100000;
    std::uint64_t iterations = 30;
    std::uint64_t mc_budget = 100000;
    std::uint64_t paired_draws = 1000000;
};

struct Scenario {
    json config;
    std::string command;
    std::uint64_t seed = 1;
    int workers = 1;
    Budgets budgets;
    fs::path out_dir;
};

Budgets parse_budgets(const json& cfg) {
    Budgets b;
    if (!cfg.contains("budgets")) return b;
    const auto& j = cfg.at("budgets");
    b.replicas = j.value("replicas", b.replicas);
    b.iterations = j.value("iterations", b.iterations);
    b.mc_budget = j.value("mc_budget", b.mc_budget);
    b.paired_draws = j.value("paired_draws", b.paired_draws);
    if (b.replicas == 0 || b.iterations == 0 || b.mc_budget == 0)
        throw ConfigError("budgets must be positive");
    return b;
}

json params_of(const Scenario& sc) {
    return sc.config.contains("parameters") ? sc.config.at("parameters") : json::object();
}

json report_skeleton(const Scenario& sc) {
    json rep;
    rep["command"] = sc.command;
    rep["version"] = kVersion;
    rep["seed"] = sc.seed;
    rep["config"] = sc.config;
    return rep;
}

void finish(const Scenario& sc, json& rep) {
    io::write_text_file((sc.out_dir / "report.json").string(), rep.dump(2) + "\n");
}

json dist_summary(const mc::EmpiricalDist& d) {
    json j;
    j["count"] = d.size();
    j["mean"] = {{"value", d.mean()},
                 {"std_error", std::sqrt(std::max(d.moment(2.0) - d.mean() * d.mean(), 0.0) /
                                         static_cast<double>(d.size()))},
                 {"provenance", "monte-carlo"}};
    j["second_moment"] = {{"value", d.moment(2.0)}, {"provenance", "monte-carlo"}};
    if (d.truncation_bound > 0.0) j["truncation_bound"] = d.truncation_bound;
    return j;
}

// ---------------------------------------------------------------------------

int run_criteria(const Scenario& sc) {
    auto model = io::model_from_json(sc.config.at("model"));
    criteria::VerdictOptions opts;
    opts.search_max = params_of(sc).value("search_max", 8.0);
    opts.budget = sc.budgets.mc_budget;
    opts.seed = sc.seed;
    opts.workers = sc.workers;
    auto rep = criteria::existence_verdict(model, opts);
    json out = report_skeleton(sc);
    out["criteria"] = io::criteria_report_to_json(rep);
    finish(sc, out);
    return 0;
}

int run_iterate_lst(const Scenario& sc) {
    auto model = io::model_from_json(sc.config.at("model"));
    json p = params_of(sc);
    double seed_mean = p.value("seed_mean", 1.0);
    lst::IterateLstOptions opts;
    opts.max_iter = p.value("max_iter", 60);
    opts.tol = p.value("tol", 1e-9);
    opts.step.mc_budget = sc.budgets.mc_budget;
    opts.step.seed = sc.seed;
    opts.step.workers = sc.workers;
    opts.step.force_mc = p.value("force_mc", false);
    auto result = lst::picard_iterate(lst::LstGrid::point_mass(seed_mean), model, opts);
    auto fit = lst::estimate_alpha_m(result.grid);
    json out = report_skeleton(sc);
    out["iterate_lst"] = {{"iterations", result.iterations},
                          {"converged", result.converged},
                          {"final_change",
                           {{"value", result.sup_trace.empty() ? 0.0 : result.sup_trace.back()},
                            {"provenance", "quadrature"}}},
                          {"alpha_m",
                           {{"alpha", fit.alpha}, {"m", fit.m}, {"provenance", "quadrature"}}}};
    io::write_lst_csv(result.grid, (sc.out_dir / "lst.csv").string());
    io::write_loglog_csv(result.grid, (sc.out_dir / "plot.csv").string());
    std::string trace = "iteration,sup_change\n";
    for (std::size_t i = 0; i < result.sup_trace.size(); ++i)
        trace += std::to_string(i + 1) + "," + io::format_double(result.sup_trace[i]) + "\n";
    io::write_text_file((sc.out_dir / "trace.csv").string(), trace);
    finish(sc, out);
    return 0;
}

int run_simulate(const Scenario& sc) {
    auto model = io::model_from_json(sc.config.at("model"));
    json p = params_of(sc);
    mc::BrwOptions opts;
    opts.gamma = p.value("gamma", 1.0);
    opts.generations = p.value("generations", 12);
    opts.pop_cap = p.value("pop_cap", static_cast<std::uint64_t>(10000000));
    opts.replicas = sc.budgets.replicas;
    opts.seed = sc.seed;
    opts.workers = sc.workers;
    auto result = mc::simulate_brw_martingale(model, opts);
    auto dist = result.dist();
    json out = report_skeleton(sc);
    out["simulate"] = dist_summary(dist);
    out["simulate"]["generations"] = result.generations;
    out["simulate"]["gamma"] = result.gamma;
    out["simulate"]["normalization"] = {{"value", result.norm}, {"provenance", "exact"}};
    out["simulate"]["censored"] = result.censored;
    io::write_samples_csv(dist, (sc.out_dir / "samples.csv").string());
    finish(sc, out);
    return 0;
}

int run_spine(const Scenario& sc) {
    auto model = io::model_from_json(sc.config.at("model"));
    json p = params_of(sc);
    mc::SpineOptions opts;
    opts.beta = p.value("beta", 1.0);
    opts.depth = p.value("depth", 60);
    opts.replicas = sc.budgets.replicas;
    opts.seed = sc.seed;
    opts.workers = sc.workers;
    auto result = mc::simulate_spine_perpetuity(model, opts);
    mc::EmpiricalDist v(result.v);
    json out = report_skeleton(sc);
    out["spine"] = dist_summary(v);
    out["spine"]["depth"] = result.depth;
    out["spine"]["cutoff_fraction"] = {{"value", result.cutoff_fraction},
                                       {"provenance", "monte-carlo"}};
    out["spine"]["v1_mean_stable"] = result.v1_mean_stable;
    io::write_samples_csv(v, (sc.out_dir / "samples.csv").string());
    finish(sc, out);
    return 0;
}

int run_tails(const Scenario& sc) {
    auto model = io::model_from_json(sc.config.at("model"));
    json p = params_of(sc);
    double moment_p = p.value("p", 2.0);
    auto moment = tails::check_moment_condition(model, moment_p);
    double b = tails::tail_root_b(model, p.value("b_max", 8.0));

    mc::IterateOptions iter;
    iter.replicas = sc.budgets.replicas;
    iter.iterations = sc.budgets.iterations;
    iter.seed = Rng::derive(sc.seed, 101);
    iter.workers = sc.workers;
    iter.track_ks = false;
    auto fp = mc::iterate_population(model, mc::EmpiricalDist::point_mass(1.0, sc.budgets.replicas),
                                     iter);
    // fixed points scale; pin the resampling drift back to unit mean
    mc::EmpiricalDist pool = fp.pool.scaled(1.0 / fp.pool.mean());

    tails::CbOptions cb;
    cb.paired_draws = sc.budgets.paired_draws;
    cb.seed = Rng::derive(sc.seed, 202);
    cb.workers = sc.workers;
    auto rep = tails::compute_cb(model, pool, b, cb);
    rep.hill = tails::hill_estimate(pool, p.value("k_fraction", 0.0005));

    json out = report_skeleton(sc);
    out["moment_condition"] = io::moment_report_to_json(moment);
    out["tails"] = io::tail_report_to_json(rep);
    io::write_plateau_csv(rep, (sc.out_dir / "plateau.csv").string());
    io::write_samples_csv(pool, (sc.out_dir / "samples.csv").string());
    finish(sc, out);
    return 0;
}

int run_stable(const Scenario& sc) {
    json p = params_of(sc);
    double alpha = p.value("alpha", 0.5);
    Rng rng(sc.seed);
    auto draws = mc::sample_positive_stable(alpha, sc.budgets.replicas, rng);
    auto grid = lst::stable_transform(lst::LstGrid::point_mass(1.0), alpha);
    auto fit = lst::estimate_alpha_m(grid);
    json out = report_skeleton(sc);
    json dev = json::array();
    for (double s : {0.1, 1.0, 10.0})
        dev.push_back({{"s", s},
                       {"empirical", {{"value", draws.laplace(s)}, {"provenance", "monte-carlo"}}},
                       {"target", {{"value", std::exp(-std::pow(s, alpha))}, {"provenance", "exact"}}}});
    out["stable"] = {{"alpha", alpha},
                     {"transform_check", dev},
                     {"alpha_m", {{"alpha", fit.alpha}, {"m", fit.m}, {"provenance", "quadrature"}}}};
    io::write_lst_csv(grid, (sc.out_dir / "lst.csv").string());
    io::write_samples_csv(draws, (sc.out_dir / "samples.csv").string());
    finish(sc, out);
    return 0;
}

int run_pitman_yor(const Scenario& sc) {
    auto problem = io::problem_from_json(
        sc.config.contains("problem") ? sc.config.at("problem") : sc.config.at("model"));
    auto drift = pitmanyor::check_existence(problem);
    json out = report_skeleton(sc);
    out["pitman_yor"]["drift"] = criteria::drift_name(drift.verdict);
    if (drift.verdict == criteria::Drift::negative) {
        pitmanyor::SolveOptions opts;
        opts.replicas = sc.budgets.replicas;
        opts.iterations = sc.budgets.iterations;
        opts.seed = sc.seed;
        opts.workers = sc.workers;
        auto mu = pitmanyor::solve_pitman_yor(problem, opts);
        pitmanyor::VerifyOptions vopts;
        vopts.samples = sc.budgets.replicas;
        vopts.seed = sc.seed + 1;
        auto check = pitmanyor::verify_size_bias_equation(mu, problem, vopts);
        out["pitman_yor"]["solution"] = dist_summary(mu);
        out["pitman_yor"]["size_bias_check"] = {
            {"ks", {{"value", check.ks}, {"provenance", "monte-carlo"}}}, {"pass", check.pass}};
        io::write_samples_csv(mu, (sc.out_dir / "samples.csv").string());
    }
    finish(sc, out);
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed_flag,
            std::optional<std::string> out_flag, int workers) {
    json cfg = io::read_json_file(config_path);
    Scenario sc;
    sc.config = cfg;
    if (!cfg.contains("command")) throw ConfigError("config needs a command");
    sc.command = cfg.at("command").get<std::string>();
    sc.seed = seed_flag ? *seed_flag : cfg.value("seed", static_cast<std::uint64_t>(1));
    sc.workers = workers;
    sc.budgets = parse_budgets(cfg);
    std::string out_dir = out_flag ? *out_flag : cfg.value("output", std::string("out"));
    sc.out_dir = out_dir;
    fs::create_directories(sc.out_dir);

    if (sc.command == "criteria") return run_criteria(sc);
    if (sc.command == "iterate-lst") return run_iterate_lst(sc);
    if (sc.command == "simulate") return run_simulate(sc);
    if (sc.command == "spine") return run_spine(sc);
    if (sc.command == "tails") return run_tails(sc);
    if (sc.command == "stable") return run_stable(sc);
    if (sc.command == "pitman-yor") return run_pitman_yor(sc);
    throw ConfigError("unknown command: " + sc.command);
}

int cmd_report(const std::string& a_path, const std::string& b_path) {
    auto a = io::read_samples_csv(a_path);
    auto b = io::read_samples_csv(b_path);
    json out;
    out["ks"] = mc::ks_distance(a, b);
    auto table = [](const mc::EmpiricalDist& d) {
        json j;
        j["count"] = d.size();
        j["mean"] = d.mean();
        j["second_moment"] = d.moment(2.0);
        if (d.size() >= 10000) {
            auto hill = tails::hill_estimate(d, 0.01);
            j["hill"] = {{"value", hill.index}, {"ci", {hill.lo, hill.hi}}};
        }
        return j;
    };
    out["a"] = table(a);
    out["b"] = table(b);
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fixed points of branching random walk smoothing transforms"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "execute a scenario config");
    std::string config_path;
    run->add_option("config", config_path, "scenario JSON")->required();
    std::uint64_t seed_val = 0;
    auto* seed_opt = run->add_option("--seed", seed_val, "override the config seed");
    std::string out_val;
    auto* out_opt = run->add_option("--out", out_val, "override the output directory");
    int workers = 1;
    if (const char* env = std::getenv("SMOOTHFIX_WORKERS")) workers = std::atoi(env);
    run->add_option("--workers", workers, "worker threads inside module calls");

    auto* report = app.add_subcommand("report", "compare two sample CSVs");
    std::string a_path, b_path;
    report->add_option("a", a_path, "first samples CSV")->required();
    report->add_option("b", b_path, "second samples CSV")->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) {
            if (workers < 1) throw ConfigError("workers must be >= 1");
            return cmd_run(config_path,
                           seed_opt->count() ? std::optional<std::uint64_t>(seed_val) : std::nullopt,
                           out_opt->count() ? std::optional<std::string>(out_val) : std::nullopt,
                           workers);
        }
        return cmd_report(a_path, b_path);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "verdict failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
