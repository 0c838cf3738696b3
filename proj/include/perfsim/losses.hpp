#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perfsim/model.hpp"
#include "perfsim/population.hpp"

namespace perfsim {

enum class LossFamily {
    SquaredError,       // (y - theta.x)^2, Linear model
    LogisticNLL,        // softplus(z) - y z with z = theta.x, Logistic model
    ScalarMeanSquared,  // (y - theta0)^2, ScalarMean model
    ZeroOne,            // 1{1{x >= theta} != y}, Threshold1d model only
};

const char* loss_family_name(LossFamily f);
LossFamily loss_family_from_name(const std::string& name);

struct LossSpec {
    LossFamily family = LossFamily::ScalarMeanSquared;
    std::optional<double> gamma;     // strong-convexity coefficient, if known
    std::optional<double> beta;      // joint-smoothness coefficient, if known
    std::optional<double> loss_sup;  // configured bound on the loss over the run

    bool differentiable() const { return family != LossFamily::ZeroOne; }
};

enum class MechanismKind { Plain, GLP, SLP, RW, GLV, DROChi2 };

const char* mechanism_name(MechanismKind k);
MechanismKind mechanism_from_name(const std::string& name);

/// Tagged choice of objective modification. `rho` is the penalty/re-weighting
/// strength; `radius` is the chi^2 ball radius (DROChi2 only). The RW loss
/// vector lives in the dynamics engine, not here.
struct FairMechanism {
    MechanismKind kind = MechanismKind::Plain;
    double rho = 0.0;
    double radius = 0.0;
};

// Per-sample losses.
double point_loss(const LossSpec& spec, const Model& model, const Sample& sample);
std::vector<double> point_loss_grad(const LossSpec& spec, const Model& model, const Sample& sample);

// Population-level losses.
double group_expected_loss(const LossSpec& spec, const Model& model, const GroupDistribution& group);
std::vector<double> group_expected_loss_grad(const LossSpec& spec, const Model& model,
                                             const GroupDistribution& group);
double mixture_expected_loss(const Model& model, const LossSpec& spec, const PopulationState& pop);
std::vector<double> mixture_expected_loss_grad(const Model& model, const LossSpec& spec,
                                               const PopulationState& pop);

/// Weighted group-loss sum with explicit weights q in place of the fractions.
double weighted_group_loss(const Model& model, const LossSpec& spec, const PopulationState& pop,
                           const std::vector<double>& q);
std::vector<double> weighted_group_loss_grad(const Model& model, const LossSpec& spec,
                                             const PopulationState& pop, const std::vector<double>& q);

// Fair objectives. rho = 0 reproduces the plain mixture loss bit-for-bit.
double glp_objective(const Model& model, const PopulationState& pop, const LossSpec& spec, double rho);
std::vector<double> glp_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                 double rho);
double slp_objective(const Model& model, const PopulationState& pop, const LossSpec& spec, double rho);
std::vector<double> slp_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                 double rho);
double glv_objective(const Model& model, const PopulationState& pop, const LossSpec& spec, double rho);
std::vector<double> glv_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                 double rho);

/// q = (p + rho*l) / ||p + rho*l||_1. rho = 0 returns p unchanged.
std::vector<double> rw_weights(const std::vector<double>& p, const std::vector<double>& l, double rho);

double rw_objective(const Model& model, const PopulationState& pop, const LossSpec& spec,
                    const std::vector<double>& q);
std::vector<double> rw_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                const std::vector<double>& q);

/// Fraction vector in the chi^2 ball of radius r around p maximizing the
/// weighted group loss; two-group closed form q = p +- sqrt(r p_a p_b),
/// numeric projection with clipping for 3..8 groups. Ties keep q = p.
std::vector<double> chi2_worst_weights(const std::vector<double>& p,
                                       const std::vector<double>& group_losses, double radius);

/// Effective smoothness of the fair objective: (2 rho lbar + 1) beta for
/// GLP/SLP, (rho lbar + 1) beta for RW, beta for Plain. GLV and DROChi2
/// carry no certificate.
double tilde_beta(MechanismKind kind, double rho, double loss_sup, double beta);

}  // namespace perfsim
