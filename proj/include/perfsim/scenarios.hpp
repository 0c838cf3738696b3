#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfsim/dynamics.hpp"

namespace perfsim {

enum class PopulationSource {
    SyntheticGaussianMean,
    SyntheticGaussianClassify,
    TwoPointExample1,
    StrategicExample2,
    DROExample4,
    GLVExample3,
    GLVDivergence,
    TabularCSV,
    MultiGroupGaussian,
};

const char* population_source_name(PopulationSource s);
PopulationSource population_source_from_name(const std::string& name);

struct ScenarioConfig {
    std::string name;
    std::string path;  // file the config was loaded from, if any

    PopulationSource source = PopulationSource::SyntheticGaussianMean;
    // Synthetic source parameters.
    std::vector<double> fractions0;
    std::vector<double> targets;
    double noise_sd = 0.05;
    int samples = 1000;
    // Tabular source parameters.
    std::string csv_path;
    std::vector<std::string> feature_cols;
    std::string label_col;
    std::string group_col;
    bool normalize = false;

    ModelFamily model_family = ModelFamily::ScalarMean;
    std::vector<double> theta0;

    LossSpec loss;
    TransitionSpec transition;
    DeploymentSchema schema;
    OptimizerSettings optimizer;

    MechanismKind mechanism = MechanismKind::Plain;
    double rho = 0.0;
    double radius = 0.0;
    std::vector<double> rho_list;

    std::optional<double> epsilon;  // assumed joint sensitivity, for certificates
    double tau = 1e-6;
    int max_rounds = 200;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<std::string, std::string>> overrides;  // applied --set pairs

    EngineConfig engine_config(std::uint64_t seed) const;
};

/// Parses and validates a JSON scenario config; missing-extension paths
/// resolve to `<path>.json`. ValidationError lists every violation.
ScenarioConfig load_scenario(const std::string& path);
ScenarioConfig parse_scenario(const std::string& json_text, const std::string& origin);

/// Applies one `key=value` override (mechanism, rho, radius, schema, k, tau,
/// max_rounds, samples, epsilon, seeds, csv_path).
void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value);

/// Materializes the scenario's population; pure function of (cfg, seed).
PopulationState build_population(const ScenarioConfig& cfg, std::uint64_t seed);

struct IngestResult {
    PopulationState pop;
    std::vector<std::string> group_names;  // index-aligned with group ids
    std::vector<double> feature_means;     // z-score stats over the whole file
    std::vector<double> feature_sds;
};

IngestResult ingest_tabular(const std::string& path, const std::vector<std::string>& feature_cols,
                            const std::string& label_col, const std::string& group_col,
                            bool normalize);

}  // namespace perfsim
