#include "smoothfix/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smoothfix/errors.hpp"

namespace smoothfix::io {

namespace {

std::vector<models::Atom> atoms_from_json(const json& arr) {
    std::vector<models::Atom> atoms;
    for (const auto& a : arr) atoms.push_back({a.at("value").get<double>(), a.at("prob").get<double>()});
    return atoms;
}

json atoms_to_json(const std::vector<models::Atom>& atoms) {
    json arr = json::array();
    for (const auto& a : atoms) arr.push_back({{"value", a.value}, {"prob", a.prob}});
    return arr;
}

models::DecayProfile profile_from_json(const json& j) {
    if (j.contains("name")) {
        std::string name = j.at("name").get<std::string>();
        if (name != "exp") throw ConfigError("unknown profile name: " + name);
        return models::DecayProfile::exponential(j.at("rate").get<double>());
    }
    if (j.contains("t") && j.contains("h")) {
        auto ts = j.at("t").get<std::vector<double>>();
        auto hs = j.at("h").get<std::vector<double>>();
        if (ts.size() != hs.size() || ts.size() < 2)
            throw ConfigError("tabulated profile needs matching (t, h) arrays");
        if (ts.front() != 0.0) throw ConfigError("tabulated profile must start at t = 0");
        if (hs.back() != 0.0) throw ConfigError("tabulated profile must end with h = 0");
        // pairs (t_i, h_i): value h_i holds on [t_i, t_{i+1})
        std::vector<double> edges, levels;
        for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
            edges.push_back(ts[i + 1]);
            levels.push_back(hs[i]);
        }
        return models::DecayProfile::step(std::move(edges), std::move(levels));
    }
    throw ConfigError("profile must be {\"name\":\"exp\",...} or a (t,h) table");
}

json profile_to_json(const models::DecayProfile& p) {
    if (p.kind() == models::DecayProfile::Kind::exponential)
        return {{"name", "exp"}, {"rate", p.rate()}};
    std::vector<double> ts{0.0};
    std::vector<double> hs;
    for (std::size_t i = 0; i < p.edges().size(); ++i) {
        hs.push_back(p.levels()[i]);
        ts.push_back(p.edges()[i]);
    }
    hs.push_back(0.0);
    return {{"t", ts}, {"h", hs}};
}

} // namespace

models::WeightModel model_from_json(const json& j) {
    try {
        std::string kind = j.at("kind").get<std::string>();
        models::WeightModel model = [&]() {
            if (kind == "fixed_weights")
                return models::WeightModel::fixed_weights(j.at("weights").get<std::vector<double>>());
            if (kind == "common_random_weight")
                return models::WeightModel::common_random_weight(j.at("count").get<std::uint64_t>(),
                                                                 atoms_from_json(j.at("atoms")));
            if (kind == "random_count_fixed_weight") {
                const auto& c = j.at("count");
                models::CountDist count = c.contains("geometric")
                                              ? models::CountDist::geometric(
                                                    c.at("geometric").at("q").get<double>())
                                              : models::CountDist::from_atoms(
                                                    atoms_from_json(c.at("atoms")));
                return models::WeightModel::random_count_fixed_weight(std::move(count),
                                                                      j.at("weight").get<double>());
            }
            if (kind == "shot_noise")
                return models::WeightModel::shot_noise(profile_from_json(j.at("h")),
                                                       j.at("lambda").get<double>());
            throw ConfigError("unknown model kind: " + kind);
        }();
        if (j.contains("lattice_span") && !j.at("lattice_span").is_null())
            model.lattice_span = j.at("lattice_span").get<double>();
        return model;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad model description: ") + e.what());
    }
}

json model_to_json(const models::WeightModel& model) {
    json j;
    switch (model.kind()) {
        case models::WeightModel::Kind::fixed_weights:
            j = {{"kind", "fixed_weights"}, {"weights", model.weights()}};
            break;
        case models::WeightModel::Kind::common_random_weight:
            j = {{"kind", "common_random_weight"},
                 {"count", model.count()},
                 {"atoms", atoms_to_json(model.atoms())}};
            break;
        case models::WeightModel::Kind::random_count_fixed_weight: {
            json c;
            if (model.count_dist().kind() == models::CountDist::Kind::geometric)
                c = {{"geometric", {{"q", model.count_dist().q()}}}};
            else
                c = {{"atoms", atoms_to_json(model.count_dist().atoms())}};
            j = {{"kind", "random_count_fixed_weight"},
                 {"count", c},
                 {"weight", model.weight_value()}};
            break;
        }
        case models::WeightModel::Kind::shot_noise:
            j = {{"kind", "shot_noise"},
                 {"h", profile_to_json(model.profile())},
                 {"lambda", model.intensity()}};
            break;
    }
    if (model.lattice_span) j["lattice_span"] = *model.lattice_span;
    return j;
}

pitmanyor::PitmanYorProblem problem_from_json(const json& j) {
    try {
        pitmanyor::PitmanYorProblem problem;
        const auto& nu = j.at("nu");
        if (nu.is_string()) {
            if (nu.get<std::string>() != "uniform01")
                throw ConfigError("unknown named nu: " + nu.get<std::string>());
            problem.nu = pitmanyor::NuDist::uniform01();
        } else if (nu.contains("atoms")) {
            problem.nu = pitmanyor::NuDist::from_atoms(atoms_from_json(nu.at("atoms")));
        } else if (nu.contains("x") && nu.contains("cdf")) {
            problem.nu = pitmanyor::NuDist::tabulated(nu.at("x").get<std::vector<double>>(),
                                                      nu.at("cdf").get<std::vector<double>>());
        } else {
            throw ConfigError("nu must be \"uniform01\", {atoms:...} or {x:...,cdf:...}");
        }
        problem.gamma0 = j.value("gamma0", 0.0);
        problem.m = j.value("m", 1.0);
        pitmanyor::validate_problem(problem);
        return problem;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad problem description: ") + e.what());
    }
}

json estimate_to_json(const Estimate& e) {
    json j;
    j["value"] = e.value;
    j["std_error"] = e.std_error;
    j["provenance"] = provenance_name(e.provenance);
    if (e.bound > 0.0) j["bound"] = e.bound;
    return j;
}

json criteria_report_to_json(const criteria::CriteriaReport& rep) {
    json j;
    json roots = json::array();
    for (std::size_t i = 0; i < rep.beta_roots.roots.size(); ++i)
        roots.push_back({{"value", rep.beta_roots.roots[i]},
                         {"residual", rep.beta_roots.residuals[i]},
                         {"provenance", "exact"}});
    j["beta_roots"] = {{"roots", roots},
                       {"bracket", {rep.beta_roots.search_lo, rep.beta_roots.search_hi}}};
    json drift;
    drift["verdict"] = criteria::drift_name(rep.drift.verdict);
    if (std::isfinite(rep.drift.mean_log)) {
        drift["mean_log"] = {{"value", rep.drift.mean_log},
                             {"std_error", rep.drift.mean_std_error},
                             {"provenance", rep.drift.mean_exact ? "exact" : "monte-carlo"}};
    } else {
        drift["mean_log"] = std::isnan(rep.drift.mean_log) ? "undefined"
                            : rep.drift.mean_log > 0.0     ? "+inf"
                                                           : "-inf";
    }
    if (rep.drift.erickson)
        drift["erickson_statistic"] = {{"value", *rep.drift.erickson},
                                       {"provenance", "monte-carlo"}};
    j["drift"] = drift;
    auto ir = [](const criteria::IrEstimate& e) {
        json k;
        k["value"] = std::isfinite(e.value) ? json(e.value) : json("inf");
        k["std_error"] = e.std_error;
        k["verdict"] = e.finite ? "finite" : "suspect-infinite";
        k["provenance"] = "monte-carlo";
        return k;
    };
    j["i_r_sigma"] = ir(rep.i_r_sigma);
    j["i_r_chi"] = rep.i_r_chi ? ir(*rep.i_r_chi) : json(nullptr);
    j["xlogx"] = rep.xlogx ? estimate_to_json(*rep.xlogx) : json(nullptr);
    j["condition_case"] = std::string(1, rep.condition_case);
    j["exists"] = rep.exists;
    j["alpha"] = rep.alpha ? json(*rep.alpha) : json(nullptr);
    return j;
}

json moment_report_to_json(const tails::MomentReport& rep) {
    json j;
    j["p"] = rep.p;
    j["sum_moment"] = estimate_to_json(rep.sum_moment);
    j["weight_moment"] = estimate_to_json(rep.weight_moment);
    j["verdict"] = rep.verdict;
    j["lp_convergence"] = rep.lp_convergence;
    return j;
}

json tail_report_to_json(const tails::TailReport& rep) {
    json j;
    j["b"] = rep.b;
    j["hill"] = {{"value", rep.hill.index},
                 {"ci", {rep.hill.lo, rep.hill.hi}},
                 {"k", rep.hill.k},
                 {"provenance", "monte-carlo"}};
    j["cb_formula"] = {{"value", rep.cb_formula}, {"provenance", "quadrature"}};
    j["cb_empirical"] = {{"value", rep.cb_empirical}, {"provenance", "monte-carlo"}};
    j["denominator"] = {{"value", rep.denominator}, {"provenance", "exact"}};
    j["case"] = rep.tail_case == tails::TailCase::arithmetic ? "arithmetic" : "nonarithmetic";
    j["lattice_span"] = rep.lattice_span ? json(*rep.lattice_span) : json(nullptr);
    j["noisy_difference"] = rep.noisy_difference;
    j["dominance_violation"] = {{"value", rep.dominance_violation}, {"provenance", "monte-carlo"}};
    return j;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("malformed JSON in " + path + ": " + e.what());
    }
}

json lst_to_json(const lst::LstGrid& g) {
    json j;
    j["s"] = g.args();
    j["phi"] = g.values();
    j["alpha_m"] = {{"alpha", g.extrapolation().alpha}, {"m", g.extrapolation().m}};
    return j;
}

void write_lst_csv(const lst::LstGrid& g, const std::string& path) {
    std::ostringstream os;
    os << "s,phi\n";
    for (std::size_t i = 0; i < g.args().size(); ++i)
        os << format_double(g.args()[i]) << "," << format_double(g.values()[i]) << "\n";
    write_text_file(path, os.str());
}

void write_loglog_csv(const lst::LstGrid& g, const std::string& path) {
    std::ostringstream os;
    os << "s,one_minus_phi\n";
    for (std::size_t i = 0; i < g.args().size(); ++i)
        os << format_double(g.args()[i]) << "," << format_double(1.0 - g.values()[i]) << "\n";
    write_text_file(path, os.str());
}

void write_samples_csv(const mc::EmpiricalDist& dist, const std::string& path) {
    std::ostringstream os;
    os << "value\n";
    for (double x : dist.samples()) os << format_double(x) << "\n";
    write_text_file(path, os.str());
    json meta;
    meta["count"] = dist.size();
    meta["lineage"] = dist.lineage;
    meta["truncation_bound"] = dist.truncation_bound;
    write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

mc::EmpiricalDist read_samples_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::string line;
    std::vector<double> xs;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("value", 0) == 0) continue;
        }
        try {
            xs.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ConfigError("bad number in " + path + ": " + line);
        }
    }
    if (xs.empty()) throw ConfigError("no samples in " + path);
    return mc::EmpiricalDist(std::move(xs));
}

void write_plateau_csv(const tails::TailReport& rep, const std::string& path) {
    std::ostringstream os;
    os << "x,mu_tail,n_tail,x_pow_b_tail\n";
    for (std::size_t i = 0; i < rep.grid.size(); ++i)
        os << format_double(rep.grid[i]) << "," << format_double(rep.mu_tail[i]) << ","
           << format_double(rep.n_tail[i]) << ","
           << format_double(std::pow(rep.grid[i], rep.b) * rep.mu_tail[i]) << "\n";
    write_text_file(path, os.str());
}

} // namespace smoothfix::io
