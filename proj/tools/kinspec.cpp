#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "kinspec/experiments.hpp"

using namespace kinspec;

namespace {

void print_checks(const ExperimentResult& res) {
    for (const auto& c : res.checks)
        std::cout << (c.passed ? "  ok    " : "  FLAG  ") << c.name << "  measured " << c.measured << "  bound "
                  << c.tolerance << (c.note.empty() ? "" : "  (" + c.note + ")") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinspec: spectral hydrodynamic-limit experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path, out_dir;
    int threads = 0;
    bool no_plots = false;
    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "YAML config")->required();
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");
    run->add_option("--threads", threads, "worker threads (also KINSPEC_THREADS)")->check(CLI::PositiveNumber);
    run->add_flag("--no-plots", no_plots, "skip SVG plots");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "parse and validate a config file");
    validate->add_option("config", validate_path, "YAML config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*validate) {
        try {
            auto cfg = load_config(validate_path);
            std::cout << validate_path << ": ok (experiment " << cfg.experiment << ", hash " << config_hash(cfg.source)
                      << ")\n";
            return 0;
        } catch (const Error& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    if (threads == 0)
        if (const char* env = std::getenv("KINSPEC_THREADS")) threads = std::atoi(env);
    if (threads > 0) set_thread_count(threads);
    const std::string dir = out_dir.empty() ? cfg.output : out_dir;

    try {
        auto res = run_experiment(cfg);
        write_result(res, cfg, dir, cfg.plots && !no_plots);
        std::cout << cfg.experiment << ": " << (res.passed() ? "pass" : "flagged") << "  -> " << dir << "\n";
        print_checks(res);
        return res.passed() ? 0 : 1;
    } catch (const Error& e) {
        std::cerr << "experiment " << cfg.experiment << " failed: " << e.what() << "\n";
        return e.kind() == "Config" ? 2 : 1;
    }
}
