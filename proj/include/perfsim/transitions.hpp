#pragma once

#include <string>
#include <vector>

#include "perfsim/losses.hpp"
#include "perfsim/model.hpp"
#include "perfsim/population.hpp"

namespace perfsim {

enum class TransitionKind {
    LinearRetention,          // p_a' = clamp(p_a + rate (L_b - L_a)), two groups
    RatioRetention,           // loss-ratio retention with fraction floors, two groups
    MultiGroupRatioRetention, // rank-reversed loss share, any group count
    StrategicShift,           // masked features move against theta: x = anchor - eps * theta
    BudgetImprovement,        // per-group effort budgets: x = anchor + eta_s * theta (1-D)
    ThetaFraction,            // p_a' = clamp(c0 + c1 * theta), two groups, 1-D theta
    Composite,                // children applied left to right
};

const char* transition_kind_name(TransitionKind k);
TransitionKind transition_kind_from_name(const std::string& name);

struct TransitionSpec {
    TransitionKind kind = TransitionKind::StrategicShift;

    // LinearRetention
    double rate = 0.1;
    double clamp_lo = 0.0;
    double clamp_hi = 1.0;
    // Ratio variants
    std::vector<double> p_min;
    // StrategicShift
    double epsilon = 0.0;
    std::vector<int> feature_mask;  // empty = all features manipulable
    // BudgetImprovement
    std::vector<double> budgets;
    // ThetaFraction
    double intercept = 0.5;
    double slope = 0.5;
    // Composite
    std::vector<TransitionSpec> children;
};

enum class SchemaKind { Conventional, KDelayed, Delayed };

const char* schema_kind_name(SchemaKind k);
SchemaKind schema_kind_from_name(const std::string& name);

struct DeploymentSchema {
    SchemaKind kind = SchemaKind::Conventional;
    int k = 1;                     // KDelayed repetitions
    double delta = 0.0;            // Delayed target radius
    double epsilon_assumed = 0.0;  // Delayed assumed sensitivity, in (0,1)
};

PopulationState apply_transition(const TransitionSpec& spec, const Model& model,
                                 const PopulationState& pop, const LossSpec& loss);

/// Number of repetitions for the delayed schema, ceil(r) + 1 with
/// r = ln(w1_first_step/delta) / ln(1/epsilon); 1 if already within delta.
int compute_delay_r(double epsilon_assumed, double w1_first_step, double delta);

/// Applies the repetition policy. For Delayed, the repetition count is taken
/// from `cached_delay_reps` when >= 1, else measured from this call's first
/// transition step.
PopulationState apply_schema(const TransitionSpec& spec, const DeploymentSchema& schema,
                             const Model& model, const PopulationState& pop, const LossSpec& loss,
                             int cached_delay_reps = 0);

struct SensitivityProbe {
    Model model_a;
    Model model_b;
    PopulationState pop;
};

/// Lower bound on the joint sensitivity of T: max over probes of
/// W1(T(theta;D), T(theta';D)) / ||theta - theta'||, plus D-perturbation
/// ratios across probe pairs that share a model but differ in population.
double estimate_sensitivity(const TransitionSpec& spec, const LossSpec& loss,
                            const std::vector<SensitivityProbe>& probes);

}  // namespace perfsim
