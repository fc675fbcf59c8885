// Experiment driver for the estimate-verification library. Subcommands select
// a suite (or all of them); each run writes <out>/<suite>.json and
// <out>/<suite>.csv. Exit codes: 0 all checks passed, 1 invariant violation,
// 2 usage/config error, 3 quadrature tolerance failure.
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kfp/config.hpp"
#include "kfp/errors.hpp"
#include "kfp/report.hpp"
#include "kfp/suites.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    double tolerance = 0.0;
};

kfp::ExperimentConfig load_config(const CliOptions& opt) {
    kfp::ExperimentConfig cfg = opt.config_path.empty()
                                    ? kfp::ExperimentConfig::defaults()
                                    : kfp::ExperimentConfig::from_file(opt.config_path);
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    if (opt.seed_set) cfg.seed = opt.seed;
    if (opt.jobs > 0) cfg.jobs = opt.jobs;
    if (opt.tolerance > 0.0) {
        cfg.tolerance = opt.tolerance;
        cfg.quad.rel_tol = opt.tolerance;
    }
    cfg.validate();
    return cfg;
}

int run_suites(const CliOptions& opt, const std::vector<std::string>& names) {
    kfp::ExperimentConfig cfg;
    try {
        cfg = load_config(opt);
    } catch (const kfp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    bool invariants_ok = true;
    try {
        // run everything first so a late usage error cannot leave partial output
        std::vector<std::pair<std::string, kfp::SuiteOutcome>> results;
        for (const std::string& name : names) {
            const auto& reg = kfp::suite_registry();
            const auto it = reg.find(name);
            if (it == reg.end()) {
                std::cerr << "usage error: unknown suite '" << name << "'\n";
                return 2;
            }
            results.emplace_back(name, it->second(cfg));
        }
        for (const auto& [name, outcome] : results) {
            kfp::write_outcome(cfg, name, outcome);
            std::cout << name << ": " << (outcome.invariants_ok ? "ok" : "INVARIANT VIOLATION")
                      << "\n";
            invariants_ok = invariants_ok && outcome.invariants_ok;
        }
    } catch (const kfp::ToleranceError& e) {
        std::cerr << "tolerance failure: " << e.what() << "\n";
        return 3;
    } catch (const kfp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return invariants_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification suites for the four-scaling kinetic operator estimates"};
    app.require_subcommand(1);
    app.fallthrough();

    CliOptions opt;
    app.add_option("--config", opt.config_path, "experiment config file");
    app.add_option("--out", opt.out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", opt.seed, "root seed (overrides config)");
    app.add_option("--jobs", opt.jobs, "worker count (overrides config)");
    app.add_option("--tolerance", opt.tolerance, "quadrature relative tolerance (overrides config)");

    const std::vector<std::string> suite_names = {"check-geometry", "solve", "estimate-constant",
                                                  "poincare",       "kernel-check", "multiplier",
                                                  "maximal-sharp"};
    std::string selected;
    for (const std::string& name : suite_names) {
        auto* sc = app.add_subcommand(name, "run the " + name + " suite");
        sc->callback([&selected, name] { selected = name; });
    }
    auto* all = app.add_subcommand("all", "run every suite");
    all->callback([&selected] { selected = "all"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    opt.seed_set = seed_opt->count() > 0;

    std::vector<std::string> to_run;
    if (selected == "all")
        to_run = suite_names;
    else
        to_run = {selected};
    return run_suites(opt, to_run);
}
