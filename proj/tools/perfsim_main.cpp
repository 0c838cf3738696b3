// Command-line driver: run single experiments, rho sweeps, the counterexample
// suite, and config validation. See README.md for the scenario format.
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "perfsim/runner.hpp"

namespace {

using perfsim::ScenarioConfig;

ScenarioConfig load_with_overrides(const std::string& path, const std::vector<std::string>& sets,
                                   const std::string& seeds, double tau, int max_rounds) {
    ScenarioConfig cfg = perfsim::load_scenario(perfsim::resolve_scenario_path(path));
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            perfsim::fail(perfsim::Errc::ValidationError, "--set expects key=value, got '" + kv + "'");
        perfsim::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!seeds.empty()) perfsim::apply_override(cfg, "seeds", seeds);
    if (tau > 0) perfsim::apply_override(cfg, "tau", std::to_string(tau));
    if (max_rounds > 0) perfsim::apply_override(cfg, "max_rounds", std::to_string(max_rounds));
    return cfg;
}

void print_manifest(const perfsim::RunManifest& manifest) {
    for (const auto& line : manifest.run_summaries) std::cout << line << "\n";
    std::cout << "outputs: " << manifest.output_files.size() << " file(s), config hash "
              << manifest.config_hash << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perfsim: repeated risk minimization over model-dependent populations"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", seeds;
    std::vector<std::string> sets;
    double tau = 0;
    int max_rounds = 0, parallel = 1;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config) sub->add_option("config", config_path, "scenario config path")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--set", sets, "override key=value (repeatable)");
        sub->add_option("--seeds", seeds, "colon-separated seed list, e.g. 1:2:3");
        sub->add_option("--tau", tau, "stopping tolerance override");
        sub->add_option("--max-rounds", max_rounds, "round limit override");
        sub->add_option("--parallel", parallel, "concurrent runs");
    };

    auto* run = app.add_subcommand("run", "execute the configured mechanism per seed");
    add_common(run, true);
    auto* sweep = app.add_subcommand("sweep", "rho sweep across glp/slp/rw");
    add_common(sweep, true);
    std::vector<double> rho_list;
    sweep->add_option("--rho", rho_list, "rho values (default: config rho_list)");
    auto* counter = app.add_subcommand("counterexamples", "reproduce the documented failure modes");
    add_common(counter, false);
    std::string scenario_dir = "scenarios";
    counter->add_option("--scenario-dir", scenario_dir, "bundled scenario directory");
    auto* validate = app.add_subcommand("validate", "parse and validate a config, print the result");
    validate->add_option("config", config_path, "scenario config path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const ScenarioConfig cfg = load_with_overrides(config_path, sets, seeds, tau, max_rounds);
            const auto manifest = perfsim::cmd_run(cfg, out_dir, parallel);
            print_manifest(manifest);
            return manifest.ok ? 0 : 1;
        }
        if (sweep->parsed()) {
            const ScenarioConfig cfg = load_with_overrides(config_path, sets, seeds, tau, max_rounds);
            if (cfg.mechanism == perfsim::MechanismKind::DROChi2) {
                std::cerr << "sweep does not drive the chi^2-DRO baseline; run the "
                             "`counterexamples` command instead\n";
                return 2;
            }
            std::vector<double> rhos = rho_list.empty() ? cfg.rho_list : rho_list;
            if (rhos.empty()) rhos = {0.0, 0.3, 0.7};
            const auto manifest = perfsim::cmd_sweep(cfg, rhos, out_dir, parallel);
            print_manifest(manifest);
            return manifest.ok ? 0 : 1;
        }
        if (counter->parsed()) {
            const char* env = std::getenv("PERFSIM_SCENARIO_DIR");
            if (scenario_dir == "scenarios" && env != nullptr) scenario_dir = env;
            const auto manifest = perfsim::cmd_counterexamples(scenario_dir, out_dir);
            print_manifest(manifest);
            return manifest.ok ? 0 : 1;
        }
        if (validate->parsed()) {
            const ScenarioConfig cfg =
                perfsim::load_scenario(perfsim::resolve_scenario_path(config_path));
            std::cout << "ok: " << cfg.name << " (" << perfsim::population_source_name(cfg.source)
                      << ", " << perfsim::mechanism_name(cfg.mechanism) << ", "
                      << cfg.seeds.size() << " seed(s))\n";
            return 0;
        }
    } catch (const perfsim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
