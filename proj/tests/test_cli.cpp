#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include "smoothfix/errors.hpp"
#include "smoothfix/io.hpp"
#include "smoothfix/montecarlo.hpp"
#include "smoothfix/rng.hpp"

namespace fs = std::filesystem;
using namespace smoothfix;
using io::json;

namespace {

int run_cmd(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("smoothfix_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string bin() { return SMOOTHFIX_BIN; }

json geometric_model_json() {
    return {{"kind", "random_count_fixed_weight"},
            {"count", {{"geometric", {{"q", 0.5}}}}},
            {"weight", 0.5}};
}

} // namespace

TEST_CASE("criteria command writes the existence verdict") {
    auto dir = fresh_dir("criteria");
    json cfg = {{"model", geometric_model_json()},
                {"command", "criteria"},
                {"seed", 1},
                {"budgets", {{"mc_budget", 20000}}},
                {"output", (dir / "out").string()}};
    io::write_text_file((dir / "config.json").string(), cfg.dump(2));
    int rc = run_cmd(bin() + " run " + (dir / "config.json").string() + " > /dev/null 2>&1");
    REQUIRE(rc == 0);
    json rep = io::read_json_file((dir / "out" / "report.json").string());
    CHECK(rep.at("criteria").at("exists").get<bool>());
    CHECK(rep.at("criteria").at("alpha").get<double>() == doctest::Approx(1.0));
    CHECK(rep.at("criteria").at("condition_case").get<std::string>() == "a");
}

TEST_CASE("iterate-lst converges to the closed form") {
    auto dir = fresh_dir("iterate");
    json cfg = {{"model", geometric_model_json()},
                {"command", "iterate-lst"},
                {"seed", 1},
                {"parameters", {{"max_iter", 60}}},
                {"output", (dir / "out").string()}};
    io::write_text_file((dir / "config.json").string(), cfg.dump(2));
    REQUIRE(run_cmd(bin() + " run " + (dir / "config.json").string() + " > /dev/null 2>&1") == 0);

    std::ifstream csv(dir / "out" / "lst.csv");
    REQUIRE(csv.good());
    std::string line;
    std::getline(csv, line); // header
    double worst = 0.0;
    while (std::getline(csv, line)) {
        auto comma = line.find(',');
        double s = std::stod(line.substr(0, comma));
        double phi = std::stod(line.substr(comma + 1));
        worst = std::max(worst, std::fabs(phi - 1.0 / (1.0 + s)));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("malformed configs exit 2 without partial outputs") {
    auto dir = fresh_dir("malformed");
    io::write_text_file((dir / "bad.json").string(), "{ not json");
    int rc = run_cmd(bin() + " run " + (dir / "bad.json").string() + " --out " +
                     (dir / "out").string() + " > /dev/null 2>&1");
    CHECK(rc == 2);
    CHECK_FALSE(fs::exists(dir / "out" / "report.json"));

    int rc2 = run_cmd(bin() + " run " + (dir / "missing.json").string() + " > /dev/null 2>&1");
    CHECK(rc2 == 2);
}

TEST_CASE("verdict failures exit 1") {
    auto dir = fresh_dir("noroot");
    // no tail root above 1 for the geometric model
    json cfg = {{"model", geometric_model_json()},
                {"command", "tails"},
                {"seed", 1},
                {"budgets", {{"replicas", 10000}, {"iterations", 5}}},
                {"output", (dir / "out").string()}};
    io::write_text_file((dir / "config.json").string(), cfg.dump(2));
    CHECK(run_cmd(bin() + " run " + (dir / "config.json").string() + " > /dev/null 2>&1") == 1);
}

TEST_CASE("report compares sample files") {
    auto dir = fresh_dir("report");
    Rng rng(5);
    auto exp1 = mc::EmpiricalDist::exponential(1.0, 100000, rng);
    std::vector<double> g(100000);
    for (auto& x : g) x = rng.exponential() + rng.exponential();
    mc::EmpiricalDist gamma21(std::move(g));
    io::write_samples_csv(exp1, (dir / "a.csv").string());
    io::write_samples_csv(gamma21, (dir / "b.csv").string());

    REQUIRE(run_cmd(bin() + " report " + (dir / "a.csv").string() + " " + (dir / "a.csv").string() +
                    " > " + (dir / "same.json").string() + " 2>/dev/null") == 0);
    json same = io::read_json_file((dir / "same.json").string());
    CHECK(same.at("ks").get<double>() == 0.0);

    REQUIRE(run_cmd(bin() + " report " + (dir / "a.csv").string() + " " + (dir / "b.csv").string() +
                    " > " + (dir / "diff.json").string() + " 2>/dev/null") == 0);
    json diff = io::read_json_file((dir / "diff.json").string());
    // sup_x |F_exp - F_gamma| = max x e^{-x} = 1/e
    CHECK(diff.at("ks").get<double>() == doctest::Approx(std::exp(-1.0)).epsilon(0.03));

    io::write_samples_csv(mc::EmpiricalDist::point_mass(0.0, 100), (dir / "zero.csv").string());
    io::write_samples_csv(mc::EmpiricalDist::point_mass(9.0, 100), (dir / "nine.csv").string());
    REQUIRE(run_cmd(bin() + " report " + (dir / "zero.csv").string() + " " +
                    (dir / "nine.csv").string() + " > " + (dir / "disjoint.json").string() +
                    " 2>/dev/null") == 0);
    CHECK(io::read_json_file((dir / "disjoint.json").string()).at("ks").get<double>() == 1.0);

    CHECK(run_cmd(bin() + " report missing_a.csv missing_b.csv > /dev/null 2>&1") == 2);
}

TEST_CASE("model JSON round trips") {
    json models_json = json::array(
        {geometric_model_json(),
         {{"kind", "fixed_weights"}, {"weights", {0.5, 0.5}}},
         {{"kind", "common_random_weight"},
          {"count", 2},
          {"atoms", json::array({{{"value", 4.0 / 3.0}, {"prob", 9.0 / 34.0}},
                                 {{"value", 0.2}, {"prob", 25.0 / 34.0}}})}},
         {{"kind", "shot_noise"}, {"h", {{"name", "exp"}, {"rate", 1.0}}}, {"lambda", 1.0}},
         {{"kind", "shot_noise"},
          {"h", {{"t", {0.0, 1.0, 2.0}}, {"h", {0.7, 0.2, 0.0}}}},
          {"lambda", 2.0}}});
    for (const auto& j : models_json) {
        auto model = io::model_from_json(j);
        auto j2 = io::model_to_json(model);
        auto model2 = io::model_from_json(j2);
        CHECK(io::model_to_json(model2) == j2);
    }
    CHECK_THROWS_AS(io::model_from_json(json{{"kind", "unknown"}}), smoothfix::ConfigError);
}
