#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "perfsim/metrics.hpp"
#include "perfsim/scenarios.hpp"

namespace perfsim {

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> output_files;
    std::vector<double> wall_times_sec;
    std::vector<std::string> run_summaries;  // one line per run: verdict + certificate
    bool ok = true;

    std::string to_json() const;
};

/// FNV-1a 64 over the canonical config text plus overrides.
std::string config_hash(const ScenarioConfig& cfg);

/// Per-seed runs of the configured mechanism; trajectory CSV + JSON per seed
/// under out_dir. `parallel` bounds concurrent runs.
RunManifest cmd_run(const ScenarioConfig& cfg, const std::string& out_dir, int parallel = 1);

/// rho-sweep across mechanisms {glp, slp, rw} x rho_list x seeds: summary CSV
/// (seed-mean terminal disparities per mechanism/rho) plus mean +- standard
/// error series per round, and per-run trajectories.
RunManifest cmd_sweep(const ScenarioConfig& cfg, const std::vector<double>& rho_list,
                      const std::string& out_dir, int parallel = 1);

struct CounterexampleRow {
    std::string name;
    bool pass = false;
    std::string details;
};

struct CounterexampleReport {
    std::vector<CounterexampleRow> rows;
    bool all_pass() const;
    std::string to_csv() const;
};

/// Reproduces the documented failure modes: the GLV nonconvexity probe, the
/// GLV divergence run, and the chi^2-DRO oscillation.
CounterexampleReport run_counterexamples(const std::string& scenario_dir);
RunManifest cmd_counterexamples(const std::string& scenario_dir, const std::string& out_dir);

/// Scenario path resolution: as given, else under PERFSIM_SCENARIO_DIR.
std::string resolve_scenario_path(const std::string& arg);

}  // namespace perfsim
