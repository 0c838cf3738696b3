#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perfsim/dynamics.hpp"
#include "perfsim/losses.hpp"

namespace perfsim {

double loss_disparity(const Model& model, const PopulationState& pop, const LossSpec& loss);
double loss_disparity(const std::vector<double>& group_losses);
double participation_disparity(const PopulationState& pop);
double participation_disparity(const std::vector<double>& fractions);

/// Successive d_{t+1}/d_t with d_t = step_norm + w1_step; rounds with
/// d_t < 1e-12 are skipped. Needs >= 3 trajectory points.
std::vector<double> contraction_ratios(const Trajectory& traj);

enum class SchemaCondition { Plain, KDelayedStrict };

struct StabilityCertificate {
    double gamma = 0.0;
    double beta = 0.0;
    double tilde_beta = 0.0;
    double epsilon = 0.0;
    bool epsilon_estimated = false;  // false: assumed from config
    double lhs = 0.0;                // epsilon (1 + tilde_beta / gamma)
    SchemaCondition condition = SchemaCondition::Plain;
    bool holds = false;

    double threshold() const {
        return condition == SchemaCondition::Plain ? 1.0 : 1.0 - epsilon;
    }
};

/// Contraction certificate for the declared schema condition. Throws
/// NoCertificate for GLV/DRO or when gamma/beta/loss_sup are unknown.
StabilityCertificate certificate(const LossSpec& loss, MechanismKind mechanism, double rho,
                                 double epsilon, bool epsilon_estimated = false,
                                 SchemaCondition condition = SchemaCondition::Plain);

struct MonotonicityRow {
    double rho = 0.0;
    double loss_disparity_ps = 0.0;
    double participation_disparity_ps = 0.0;
    std::string verdict;
    double assumption1_fraction = 0.0;  // rounds where the majority had the lower loss
    bool flagged = false;               // adjacent non-increase violation
    std::string error;                  // per-rho failure, row retained
};

struct MonotonicityReport {
    MechanismKind mechanism = MechanismKind::Plain;
    std::vector<MonotonicityRow> rows;
    std::string to_csv() const;
};

/// Runs find_fair_ps per rho (ascending) and reports terminal disparities,
/// flagging adjacent pairs that violate non-increase beyond 1e-6.
MonotonicityReport monotonicity_report(const EngineConfig& base, MechanismKind mechanism,
                                       const std::vector<double>& rho_list, double tau);

/// Fraction of rounds where argmax_s p_s == argmin_s L_s.
double assumption1_fraction(const Trajectory& traj);

}  // namespace perfsim
