#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "perfsim/losses.hpp"
#include "perfsim/model.hpp"
#include "perfsim/optimizer.hpp"
#include "perfsim/population.hpp"
#include "perfsim/transitions.hpp"

namespace perfsim {

struct OptimizerSettings {
    double tol = 1e-10;
    int max_iters = 100000;
    double box_lo = -10.0;
    double box_hi = 10.0;
};

/// Everything one deployment run needs.
struct EngineConfig {
    std::string scenario_name;
    PopulationState pop0;
    Model theta0;
    LossSpec loss;
    TransitionSpec transition;
    DeploymentSchema schema;
    FairMechanism mechanism;
    OptimizerSettings optimizer;
    double tau = 1e-6;
    int max_rounds = 200;
    std::uint64_t seed = 0;  // echoed into the trajectory
};

struct TrajectoryPoint {
    int t = 0;
    std::vector<double> theta;
    std::vector<double> fractions;
    std::vector<double> group_losses;
    double perf_loss = 0.0;
    double loss_disparity = 0.0;
    double participation_disparity = 0.0;
    double step_norm = 0.0;
    double w1_step = 0.0;
    int n_samples = 0;  // empirical rounds only
};

struct Verdict {
    enum class Kind { Converged, Oscillating, MaxIterReached, Diverged } kind =
        Kind::MaxIterReached;
    int round = 0;   // Converged: first round with step_norm <= tau
    int period = 0;  // Oscillating

    std::string to_string() const;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    Verdict verdict;

    // Config echo.
    std::string scenario_name;
    MechanismKind mechanism = MechanismKind::Plain;
    double rho = 0.0;
    double radius = 0.0;
    SchemaKind schema = SchemaKind::Conventional;
    std::uint64_t seed = 0;
    double tau = 1e-6;
    std::vector<std::pair<std::string, std::string>> overrides;

    // Post-hoc bounded-loss audit.
    double max_point_loss_seen = 0.0;
    bool loss_sup_ok = true;

    const TrajectoryPoint& back() const { return points.back(); }
    std::vector<double> final_theta() const { return points.back().theta; }
};

/// Builds the fair objective closure for one round. For RW, `rw_q` supplies
/// the frozen weights; `max_loss_tracker`, when given, accumulates the
/// largest per-sample loss touched by value evaluations.
Objective make_objective(MechanismKind kind, double rho, const PopulationState& pop,
                         const LossSpec& loss, ModelFamily family, const OptimizerSettings& opt,
                         const std::vector<double>* rw_q = nullptr,
                         double* max_loss_tracker = nullptr);

Trajectory fair_rrm(const EngineConfig& cfg);

enum class SamplingMode { Iid, ExactReplay };

using SampleSchedule = std::function<int(int)>;

/// Empirical variant: each round minimizes over a fresh sample of size
/// schedule(t) (ExactReplay reuses the full population and reproduces
/// fair_rrm bit for bit). Reported metrics are computed on the true state.
Trajectory fair_rerm(const EngineConfig& cfg, const SampleSchedule& schedule, std::uint64_t seed,
                     SamplingMode mode = SamplingMode::Iid);

/// Sample-size schedule of the empirical theorem: n_t = C log((t+1)/p) /
/// (lhs * delta)^m, clipped below at n_min.
SampleSchedule theorem3_schedule(double leading_constant, double failure_prob, double lhs,
                                 double delta, int dimension, int n_min = 1);

/// chi^2-DRO baseline: q = worst-case weights at the current losses, then
/// minimize the q-weighted group loss, then transition.
Trajectory repeated_dro(const EngineConfig& cfg);

Verdict detect_convergence(const Trajectory& traj, double tau);

struct FairPsResult {
    std::vector<double> theta;
    PopulationState pop;
    double w1_residual = 0.0;
    double theta_residual = 0.0;
    Trajectory trajectory;
};

/// Runs fair_rrm to convergence and verifies both fixed-point conditions
/// within 10*tau. Throws NotConverged / NotAFixedPoint.
FairPsResult find_fair_ps(const EngineConfig& cfg);

std::string trajectory_to_csv(const Trajectory& traj);
std::string trajectory_to_json(const Trajectory& traj);

}  // namespace perfsim
