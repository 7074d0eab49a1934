#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "doctest.h"
#include "kinspec/experiments.hpp"

using namespace kinspec;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(KINSPEC_CLI) + " " + args + " > /dev/null 2>&1";
    int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("kinspec_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("fit_rate") {
    std::vector<double> x{1, 2, 4, 8, 16};
    auto r = fit_rate(x, x);
    CHECK(r.slope == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.r2 == doctest::Approx(1.0).epsilon(1e-14));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> xs, ys;
    for (int i = 0; i < 12; ++i) {
        double v = std::pow(10.0, -2 + 0.25 * i);
        xs.push_back(v);
        ys.push_back(v * v * (1 + 0.01 * g(rng)));
    }
    auto q = fit_rate(xs, ys);
    CHECK(q.slope >= 1.9);
    CHECK(q.slope <= 2.1);

    auto c = fit_rate(x, std::vector<double>(5, 3.0));
    CHECK(std::abs(c.slope) <= 1e-12);
    CHECK_THROWS_WITH_AS(fit_rate({1, 2, 3}, {1, 2, 3}), doctest::Contains("InsufficientSamples"), Error);
}

TEST_CASE("config parsing") {
    auto c = parse_config("experiment: limit-sweep\neps: [0.1, 0.05, 0.025, 0.0125]\ndiscretization: {d: 2, N: 6}\n");
    CHECK(c.experiment == "limit-sweep");
    CHECK(c.eps.size() == 4);
    CHECK(c.d == 2);

    CHECK_THROWS_WITH_AS(parse_config("experiment: limit-sweep\ndiscretization: {d: 2}\n", "x.yaml"),
                         doctest::Contains("requires an 'eps' list"), Error);
    try {
        parse_config("experiment: kato\nmodel:\n  type: bgk\n  nu: 1\n  colour: red\n", "y.yaml");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("y.yaml:5:3: unknown key 'colour'") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("experiment: nope\n"), Error);
    CHECK_THROWS_AS(parse_config("experiment: kato\ndiscretization: {d: 4}\n"), Error);
    CHECK_THROWS_AS(parse_config("experiment: [kato\n"), Error);
    CHECK_THROWS_AS(parse_config("experiment: kato\ntime: {T: 0.1, dt: 1.0}\n"), Error);

    CHECK(config_hash("abc") == config_hash("abc"));
    CHECK(config_hash("abc") != config_hash("abd"));
    CHECK(config_hash("").size() == 16);
}

TEST_CASE("assumptions experiment passes for BGK") {
    auto c = parse_config("experiment: assumptions\nmodel: {type: bgk, nu: 1}\ndiscretization: {d: 3, N: 6}\n");
    auto res = run_experiment(c);
    CHECK(res.passed());
    CHECK(res.csv.count("audits.csv") == 1);
}

TEST_CASE("svg plot renders") {
    Plot p{"a.svg", "t", "x", "y", true, true, {{"s", {1, 10, 100}, {1, 0.1, 0.01}}}};
    auto svg = render_svg(p);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("cli exit codes and determinism") {
    auto dir = scratch("cli");
    std::ofstream(dir / "bad.yaml") << "experiment: limit-sweep\ndiscretization: {d: 2, N: 6}\n";
    std::ofstream(dir / "typo.yaml") << "experiment: kato\nspectrl: {}\n";
    std::ofstream(dir / "kato.yaml") << "experiment: kato\ndiscretization: {d: 2, N: 6}\nspectral: {radii: [0.01]}\n";
    std::ofstream(dir / "flag.yaml")
        << "experiment: projector-expansion\ndiscretization: {d: 2, N: 6}\nspectral: {radii: [0.001, 0.002, 0.004, "
           "0.008, 0.016]}\n";

    CHECK(run_cli("validate " + (dir / "bad.yaml").string()) == 2);
    CHECK(run_cli("validate " + (dir / "typo.yaml").string()) == 2);
    CHECK(run_cli("validate " + (dir / "kato.yaml").string()) == 0);
    CHECK(run_cli("run " + (dir / "bad.yaml").string()) == 2);
    CHECK(run_cli("run") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run " + (dir / "missing.yaml").string()) == 2);

    CHECK(run_cli("run " + (dir / "kato.yaml").string() + " --out " + (dir / "k1").string()) == 0);
    CHECK(run_cli("run " + (dir / "kato.yaml").string() + " --threads 1 --no-plots --out " + (dir / "k2").string()) == 0);
    auto j = nlohmann::json::parse(slurp(dir / "k1" / "summary.json"));
    CHECK(j["experiment"] == "kato");
    CHECK(j["status"] == "pass");
    CHECK(j["library_version"] == kVersion);
    CHECK(j["config_hash"] == config_hash(slurp(dir / "kato.yaml")));
    CHECK(!j["statement"].get<std::string>().empty());

    // projector-expansion flags the zeroth-order comparison: exit 1, artifacts still written
    CHECK(run_cli("run " + (dir / "flag.yaml").string() + " --out " + (dir / "p1").string()) == 1);
    CHECK(run_cli("run " + (dir / "flag.yaml").string() + " --no-plots --out " + (dir / "p2").string()) == 1);
    CHECK(fs::exists(dir / "p1" / "remainders.svg"));
    CHECK(!fs::exists(dir / "p2" / "remainders.svg"));
    CHECK(slurp(dir / "p1" / "remainders.csv") == slurp(dir / "p2" / "remainders.csv"));
    fs::remove_all(dir);
}
