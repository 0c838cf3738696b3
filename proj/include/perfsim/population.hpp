#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "perfsim/error.hpp"

namespace perfsim {

/// One observation: features, a label, and the group it belongs to.
/// `anchor` holds the base coordinates strategic transitions shift from;
/// it equals `features` at scenario setup and never changes afterwards.
struct Sample {
    std::vector<double> features;
    double label = 0.0;
    int group = 0;
    std::vector<double> anchor;

    const std::vector<double>& base() const { return anchor.empty() ? features : anchor; }
};

struct WeightedSample {
    Sample sample;
    double weight = 0.0;
};

struct GroupDistribution {
    int group = 0;
    std::vector<WeightedSample> points;

    double total_weight() const;
    void validate(int dimension) const;
};

/// Weighted mixture of per-group empirical distributions.
struct PopulationState {
    std::vector<GroupDistribution> groups;
    std::vector<double> fractions;
    int dimension = 1;

    int group_count() const { return static_cast<int>(groups.size()); }
    void validate() const;
};

PopulationState make_population(std::vector<GroupDistribution> groups, std::vector<double> fractions);

/// Flattens a population to weighted scalar support per the 1-D projection
/// rule (feature[0]); weights are fraction * within-group weight.
std::vector<std::pair<double, double>> flatten_1d(const PopulationState& pop);

double wasserstein1_1d(const GroupDistribution& a, const GroupDistribution& b);
double wasserstein1_1d(const PopulationState& a, const PopulationState& b);

/// Raw 1-D optimal transport between weighted supports (sorted CDF sweep).
double wasserstein1_1d_points(std::vector<std::pair<double, double>> a,
                              std::vector<std::pair<double, double>> b);

struct W1Estimate {
    double value = 0.0;
    bool exact = true;
};

/// Assignment-based transport diagnostic for multi-dimensional populations:
/// exact Hungarian matching for <= 64 flattened support points per side,
/// greedy upper bound beyond that. Unequal supports are resampled.
W1Estimate wasserstein1_matched(const PopulationState& a, const PopulationState& b);

/// Distance dispatch used by the engines: exact CDF sweep for d=1, matched
/// estimate otherwise.
double population_distance(const PopulationState& a, const PopulationState& b);

/// Draws n i.i.d. samples from the mixture; group chosen by fraction, point
/// by within-group weight. Deterministic in `seed`. Groups that receive no
/// draws are dropped from the output.
PopulationState sample_empirical(const PopulationState& pop, int n, std::uint64_t seed);

std::string population_to_json(const PopulationState& pop);
PopulationState population_from_json(const std::string& text);

}  // namespace perfsim
