#pragma once

#include <string>
#include <vector>

#include "perfsim/error.hpp"

namespace perfsim {

enum class ModelFamily {
    Linear,       // prediction theta . x
    Logistic,     // score theta . x, probability sigmoid(score)
    ScalarMean,   // prediction theta[0], features ignored
    Threshold1d,  // prediction 1{x[0] >= theta[0]}
};

const char* model_family_name(ModelFamily f);
ModelFamily model_family_from_name(const std::string& name);

/// A parameter vector tagged with the family it parameterizes.
struct Model {
    ModelFamily family = ModelFamily::ScalarMean;
    std::vector<double> theta;

    int dimension() const { return static_cast<int>(theta.size()); }
};

}  // namespace perfsim
