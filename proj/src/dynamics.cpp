#include "perfsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "perfsim/metrics.hpp"

namespace perfsim {

namespace {

double norm_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

double track_max_point_loss(const PopulationState& pop, const LossSpec& loss, const Model& model) {
    double m = 0.0;
    for (const auto& g : pop.groups)
        for (const auto& ws : g.points) m = std::max(m, point_loss(loss, model, ws.sample));
    return m;
}

struct RoundSolver {
    const EngineConfig& cfg;
    double* max_loss_tracker;

    // One argmin step on `pop` with the configured mechanism, warm-started at
    // `warm`. `q` carries the frozen RW or DRO weights when applicable.
    std::vector<double> solve(const PopulationState& pop, const std::vector<double>& warm,
                              const std::vector<double>* q) const {
        if (cfg.loss.family == LossFamily::ZeroOne) {
            if (cfg.mechanism.kind != MechanismKind::Plain && cfg.mechanism.rho != 0.0)
                fail(Errc::IncompatibleModel, "0-1 threshold scenarios support the plain objective only");
            return {best_threshold_1d(pop)};
        }
        const MechanismKind kind =
            q != nullptr && cfg.mechanism.kind == MechanismKind::DROChi2 ? MechanismKind::RW
                                                                         : cfg.mechanism.kind;
        Objective obj = make_objective(kind, cfg.mechanism.rho, pop, cfg.loss,
                                       cfg.theta0.family, cfg.optimizer, q, max_loss_tracker);
        const bool nonconvex = cfg.mechanism.kind == MechanismKind::GLV && cfg.mechanism.rho > 0.0;
        SolveResult r = nonconvex
                            ? minimize_multistart_1d(obj, warm, cfg.optimizer.tol,
                                                     cfg.optimizer.max_iters)
                            : minimize_smooth_convex(obj, warm, cfg.optimizer.tol,
                                                     cfg.optimizer.max_iters);
        return r.theta;
    }
};

TrajectoryPoint record_point(int t, const std::vector<double>& theta, const PopulationState& pop,
                             const LossSpec& loss, ModelFamily family, double step, double w1,
                             int n_samples) {
    Model m{family, theta};
    TrajectoryPoint pt;
    pt.t = t;
    pt.theta = theta;
    pt.fractions = pop.fractions;
    pt.group_losses.resize(pop.groups.size());
    for (std::size_t g = 0; g < pop.groups.size(); ++g)
        pt.group_losses[g] = group_expected_loss(loss, m, pop.groups[g]);
    pt.perf_loss = 0.0;
    for (std::size_t g = 0; g < pop.groups.size(); ++g)
        pt.perf_loss += pop.fractions[g] * pt.group_losses[g];
    pt.loss_disparity = pop.groups.size() >= 2 ? loss_disparity(pt.group_losses) : 0.0;
    pt.participation_disparity =
        pop.groups.size() >= 2 ? participation_disparity(pop.fractions) : 0.0;
    pt.step_norm = step;
    pt.w1_step = w1;
    pt.n_samples = n_samples;
    return pt;
}

Trajectory init_trajectory(const EngineConfig& cfg) {
    Trajectory traj;
    traj.scenario_name = cfg.scenario_name;
    traj.mechanism = cfg.mechanism.kind;
    traj.rho = cfg.mechanism.rho;
    traj.radius = cfg.mechanism.radius;
    traj.schema = cfg.schema.kind;
    traj.seed = cfg.seed;
    traj.tau = cfg.tau;
    return traj;
}

void finalize(Trajectory& traj, const EngineConfig& cfg) {
    traj.verdict = detect_convergence(traj, cfg.tau);
    if (cfg.loss.loss_sup)
        traj.loss_sup_ok = traj.max_point_loss_seen <= *cfg.loss.loss_sup;
}

// Core loop shared by the three engines. `weights_for_round` returns the
// frozen group weights for this round's argmin (nullptr = use fractions /
// mechanism objective as-is).
template <typename WeightsFn, typename SampleFn>
Trajectory run_engine(const EngineConfig& cfg, WeightsFn weights_for_round, SampleFn sample_for_round) {
    cfg.pop0.validate();
    if (cfg.tau <= 0.0) fail(Errc::ValidationError, "tau must be positive");

    Trajectory traj = init_trajectory(cfg);
    RoundSolver solver{cfg, &traj.max_point_loss_seen};

    PopulationState pop = cfg.pop0;
    std::vector<double> theta = cfg.theta0.theta;
    traj.max_point_loss_seen = track_max_point_loss(pop, cfg.loss, Model{cfg.theta0.family, theta});
    traj.points.push_back(
        record_point(0, theta, pop, cfg.loss, cfg.theta0.family, 0.0, 0.0, 0));

    PopulationState rw_prev = pop;  // D^(t-1), with D^(-1) := D^(0)
    int delay_reps = 0;

    for (int t = 1; t <= cfg.max_rounds; ++t) {
        const PopulationState* fit_pop = &pop;
        PopulationState sampled;
        int n_t = 0;
        if (sample_for_round(t, pop, sampled, n_t)) fit_pop = &sampled;

        std::vector<double> qbuf;
        const std::vector<double>* q =
            weights_for_round(t, *fit_pop, rw_prev, Model{cfg.theta0.family, theta}, qbuf);

        std::vector<double> theta_new = solver.solve(*fit_pop, theta, q);
        rw_prev = *fit_pop;

        Model deployed{cfg.theta0.family, theta_new};
        if (cfg.schema.kind == SchemaKind::Delayed && delay_reps < 1) {
            const PopulationState first = apply_transition(cfg.transition, deployed, pop, cfg.loss);
            delay_reps = compute_delay_r(cfg.schema.epsilon_assumed,
                                         population_distance(pop, first), cfg.schema.delta);
        }
        PopulationState pop_new =
            apply_schema(cfg.transition, cfg.schema, deployed, pop, cfg.loss, delay_reps);

        const double step = norm_diff(theta_new, theta);
        const double w1 = population_distance(pop_new, pop);
        traj.max_point_loss_seen =
            std::max(traj.max_point_loss_seen, track_max_point_loss(pop_new, cfg.loss, deployed));
        traj.points.push_back(
            record_point(t, theta_new, pop_new, cfg.loss, cfg.theta0.family, step, w1, n_t));

        pop = std::move(pop_new);
        theta = std::move(theta_new);
        if (step <= cfg.tau) break;
    }
    finalize(traj, cfg);
    return traj;
}

bool no_sampling(int, const PopulationState&, PopulationState&, int&) { return false; }

}  // namespace

std::string Verdict::to_string() const {
    switch (kind) {
        case Kind::Converged: return "converged(" + std::to_string(round) + ")";
        case Kind::Oscillating: return "oscillating(" + std::to_string(period) + ")";
        case Kind::MaxIterReached: return "max_iter_reached";
        case Kind::Diverged: return "diverged";
    }
    return "?";
}

Objective make_objective(MechanismKind kind, double rho, const PopulationState& pop,
                         const LossSpec& loss, ModelFamily family, const OptimizerSettings& opt,
                         const std::vector<double>* rw_q, double* max_loss_tracker) {
    if (rho < 0.0) fail(Errc::ValidationError, "rho must be nonnegative");
    const int dim = pop.dimension == 0 ? 1 : (family == ModelFamily::ScalarMean ? 1 : pop.dimension);

    Objective obj;
    obj.dimension = dim;
    obj.box_lo.assign(dim, opt.box_lo);
    obj.box_hi.assign(dim, opt.box_hi);

    std::vector<double> q;
    if (kind == MechanismKind::RW) {
        if (rw_q == nullptr) fail(Errc::WeightMismatch, "re-weighted objective needs weights");
        q = *rw_q;
    }

    // The closures reference `pop`, which must outlive the objective; the
    // engines build one objective per round over the round's population.
    auto track = [max_loss_tracker, loss, family, &pop](const std::vector<double>& th) {
        if (max_loss_tracker == nullptr) return;
        *max_loss_tracker =
            std::max(*max_loss_tracker, track_max_point_loss(pop, loss, Model{family, th}));
    };

    switch (kind) {
        case MechanismKind::Plain:
            obj.value = [track, loss, family, &pop](const std::vector<double>& th) {
                track(th);
                return mixture_expected_loss(Model{family, th}, loss, pop);
            };
            obj.gradient = [loss, family, &pop](const std::vector<double>& th) {
                return mixture_expected_loss_grad(Model{family, th}, loss, pop);
            };
            break;
        case MechanismKind::GLP:
            obj.value = [track, loss, family, rho, &pop](const std::vector<double>& th) {
                track(th);
                return glp_objective(Model{family, th}, pop, loss, rho);
            };
            obj.gradient = [loss, family, rho, &pop](const std::vector<double>& th) {
                return glp_gradient(Model{family, th}, pop, loss, rho);
            };
            break;
        case MechanismKind::SLP:
            obj.value = [track, loss, family, rho, &pop](const std::vector<double>& th) {
                track(th);
                return slp_objective(Model{family, th}, pop, loss, rho);
            };
            obj.gradient = [loss, family, rho, &pop](const std::vector<double>& th) {
                return slp_gradient(Model{family, th}, pop, loss, rho);
            };
            break;
        case MechanismKind::GLV:
            obj.value = [track, loss, family, rho, &pop](const std::vector<double>& th) {
                track(th);
                return glv_objective(Model{family, th}, pop, loss, rho);
            };
            obj.gradient = [loss, family, rho, &pop](const std::vector<double>& th) {
                return glv_gradient(Model{family, th}, pop, loss, rho);
            };
            break;
        case MechanismKind::RW:
            obj.value = [track, loss, family, q, &pop](const std::vector<double>& th) {
                track(th);
                return rw_objective(Model{family, th}, pop, loss, q);
            };
            obj.gradient = [loss, family, q, &pop](const std::vector<double>& th) {
                return rw_gradient(Model{family, th}, pop, loss, q);
            };
            break;
        case MechanismKind::DROChi2:
            fail(Errc::ValidationError, "chi^2-DRO rounds are driven by repeated_dro");
    }
    return obj;
}

Trajectory fair_rrm(const EngineConfig& cfg) {
    if (cfg.mechanism.kind == MechanismKind::DROChi2)
        fail(Errc::ValidationError, "use repeated_dro for the chi^2-DRO mechanism");

    auto weights = [&cfg](int, const PopulationState& pop, const PopulationState& prev,
                          const Model& current, std::vector<double>& qbuf) -> const std::vector<double>* {
        if (cfg.mechanism.kind != MechanismKind::RW) return nullptr;
        std::vector<double> l(pop.groups.size(), 0.0);
        for (std::size_t s = 0; s < pop.groups.size(); ++s) {
            const GroupDistribution* prev_group = nullptr;
            for (const auto& g : prev.groups)
                if (g.group == pop.groups[s].group) prev_group = &g;
            if (prev_group != nullptr)
                l[s] = pop.fractions[s] * group_expected_loss(cfg.loss, current, *prev_group);
        }
        qbuf = rw_weights(pop.fractions, l, cfg.mechanism.rho);
        return &qbuf;
    };
    return run_engine(cfg, weights, no_sampling);
}

Trajectory fair_rerm(const EngineConfig& cfg, const SampleSchedule& schedule, std::uint64_t seed,
                     SamplingMode mode) {
    if (cfg.mechanism.kind == MechanismKind::DROChi2)
        fail(Errc::ValidationError, "use repeated_dro for the chi^2-DRO mechanism");

    auto weights = [&cfg](int, const PopulationState& pop, const PopulationState& prev,
                          const Model& current, std::vector<double>& qbuf) -> const std::vector<double>* {
        if (cfg.mechanism.kind != MechanismKind::RW) return nullptr;
        std::vector<double> l(pop.groups.size(), 0.0);
        for (std::size_t s = 0; s < pop.groups.size(); ++s) {
            const GroupDistribution* prev_group = nullptr;
            for (const auto& g : prev.groups)
                if (g.group == pop.groups[s].group) prev_group = &g;
            if (prev_group != nullptr)
                l[s] = pop.fractions[s] * group_expected_loss(cfg.loss, current, *prev_group);
        }
        qbuf = rw_weights(pop.fractions, l, cfg.mechanism.rho);
        return &qbuf;
    };

    auto sampling = [&schedule, seed, mode](int t, const PopulationState& pop,
                                            PopulationState& sampled, int& n_out) {
        const int n = schedule(t);
        if (n < 1) fail(Errc::ValidationError, "sample schedule must be >= 1");
        n_out = n;
        if (mode == SamplingMode::ExactReplay) return false;
        sampled = sample_empirical(pop, n, splitmix64(seed ^ (0x9E3779B97F4A7C15ull * t)));
        return true;
    };
    return run_engine(cfg, weights, sampling);
}

SampleSchedule theorem3_schedule(double leading_constant, double failure_prob, double lhs,
                                 double delta, int dimension, int n_min) {
    if (leading_constant <= 0 || failure_prob <= 0 || failure_prob >= 1 || delta <= 0 || lhs <= 0)
        fail(Errc::ValidationError, "theorem3_schedule needs C > 0, p in (0,1), lhs > 0, delta > 0");
    return [=](int t) {
        const double denom = std::pow(lhs * delta, dimension);
        const double n = leading_constant * std::log(std::max(2.0, (t + 1.0) / failure_prob)) / denom;
        return std::max(n_min, static_cast<int>(std::ceil(n)));
    };
}

Trajectory repeated_dro(const EngineConfig& cfg) {
    if (cfg.mechanism.kind != MechanismKind::DROChi2)
        fail(Errc::ValidationError, "repeated_dro needs the dro_chi2 mechanism");
    if (cfg.mechanism.radius < 0.0) fail(Errc::NegativeRadius, "chi^2 radius must be nonnegative");

    auto weights = [&cfg](int, const PopulationState& pop, const PopulationState&,
                          const Model& current, std::vector<double>& qbuf) -> const std::vector<double>* {
        std::vector<double> ls(pop.groups.size());
        for (std::size_t s = 0; s < pop.groups.size(); ++s)
            ls[s] = group_expected_loss(cfg.loss, current, pop.groups[s]);
        qbuf = chi2_worst_weights(pop.fractions, ls, cfg.mechanism.radius);
        return &qbuf;
    };
    return run_engine(cfg, weights, no_sampling);
}

Verdict detect_convergence(const Trajectory& traj, double tau) {
    const auto& pts = traj.points;
    if (pts.size() < 2) fail(Errc::TooShort, "need at least 2 trajectory points");

    for (std::size_t t = 1; t < pts.size(); ++t)
        if (pts[t].step_norm <= tau)
            return {Verdict::Kind::Converged, static_cast<int>(t), 0};

    const auto close = [&](std::size_t i, std::size_t j) {
        return norm_diff(pts[i].theta, pts[j].theta) <= 1e-9;
    };
    const std::size_t last = pts.size() - 1;
    for (int p = 1; p <= 8; ++p) {
        if (last < static_cast<std::size_t>(p) + 1) break;
        if (close(last, last - p) && close(last - 1, last - 1 - p))
            return {Verdict::Kind::Oscillating, 0, p};
    }

    if (pts.size() >= 11) {
        bool growing = true;
        for (std::size_t t = pts.size() - 10; t < pts.size(); ++t)
            if (pts[t].step_norm <= pts[t - 1].step_norm) {
                growing = false;
                break;
            }
        if (growing) return {Verdict::Kind::Diverged, 0, 0};
    }
    return {Verdict::Kind::MaxIterReached, 0, 0};
}

FairPsResult find_fair_ps(const EngineConfig& cfg) {
    Trajectory traj = fair_rrm(cfg);
    if (traj.verdict.kind != Verdict::Kind::Converged)
        fail(Errc::NotConverged, "fair_rrm verdict " + traj.verdict.to_string() + " on scenario " +
                                     cfg.scenario_name);

    FairPsResult res;
    res.theta = traj.final_theta();
    res.trajectory = traj;

    // Reconstruct the final population by replaying the deployment steps is
    // not needed: the engine's last recorded state is the fixed-point
    // candidate. Re-derive the population from the trajectory tail.
    PopulationState pop = cfg.pop0;
    std::vector<double> theta = cfg.theta0.theta;
    int delay_reps = 0;
    for (std::size_t t = 1; t < traj.points.size(); ++t) {
        Model deployed{cfg.theta0.family, traj.points[t].theta};
        if (cfg.schema.kind == SchemaKind::Delayed && delay_reps < 1) {
            const PopulationState first = apply_transition(cfg.transition, deployed, pop, cfg.loss);
            delay_reps = compute_delay_r(cfg.schema.epsilon_assumed,
                                         population_distance(pop, first), cfg.schema.delta);
        }
        pop = apply_schema(cfg.transition, cfg.schema, deployed, pop, cfg.loss, delay_reps);
    }
    res.pop = pop;

    const Model ps_model{cfg.theta0.family, res.theta};
    const PopulationState mapped = apply_transition(cfg.transition, ps_model, res.pop, cfg.loss);
    res.w1_residual = population_distance(mapped, res.pop);
    if (res.w1_residual > 10.0 * cfg.tau)
        fail(Errc::NotAFixedPoint,
             "transition residual " + std::to_string(res.w1_residual) + " exceeds 10*tau");

    double tracker = 0.0;
    RoundSolver solver{cfg, &tracker};
    std::vector<double> qbuf;
    const std::vector<double>* q = nullptr;
    if (cfg.mechanism.kind == MechanismKind::RW) {
        std::vector<double> l(res.pop.groups.size());
        for (std::size_t s = 0; s < res.pop.groups.size(); ++s)
            l[s] = res.pop.fractions[s] *
                   group_expected_loss(cfg.loss, ps_model, res.pop.groups[s]);
        qbuf = rw_weights(res.pop.fractions, l, cfg.mechanism.rho);
        q = &qbuf;
    } else if (cfg.mechanism.kind == MechanismKind::DROChi2) {
        fail(Errc::ValidationError, "find_fair_ps does not drive the DRO baseline");
    }
    const std::vector<double> re_solved = solver.solve(res.pop, res.theta, q);
    res.theta_residual = norm_diff(re_solved, res.theta);
    if (res.theta_residual > 10.0 * cfg.tau)
        fail(Errc::NotAFixedPoint,
             "argmin residual " + std::to_string(res.theta_residual) + " exceeds 10*tau");
    return res;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string trajectory_to_csv(const Trajectory& traj) {
    std::ostringstream out;
    const std::size_t dim = traj.points.front().theta.size();
    const std::size_t groups = traj.points.front().fractions.size();
    out << "# perfsim-trajectory-v1\n";
    out << "t";
    for (std::size_t i = 0; i < dim; ++i) out << ",theta" << i;
    for (std::size_t i = 0; i < groups; ++i) out << ",fraction" << i;
    for (std::size_t i = 0; i < groups; ++i) out << ",group_loss" << i;
    out << ",perf_loss,loss_disparity,participation_disparity,step_norm,w1_step\n";
    for (const auto& p : traj.points) {
        out << p.t;
        for (double v : p.theta) out << "," << fmt(v);
        for (std::size_t i = 0; i < groups; ++i)
            out << "," << (i < p.fractions.size() ? fmt(p.fractions[i]) : "0");
        for (std::size_t i = 0; i < groups; ++i)
            out << "," << (i < p.group_losses.size() ? fmt(p.group_losses[i]) : "0");
        out << "," << fmt(p.perf_loss) << "," << fmt(p.loss_disparity) << ","
            << fmt(p.participation_disparity) << "," << fmt(p.step_norm) << "," << fmt(p.w1_step)
            << "\n";
    }
    return out.str();
}

std::string trajectory_to_json(const Trajectory& traj) {
    nlohmann::json j;
    j["scenario"] = traj.scenario_name;
    j["mechanism"] = mechanism_name(traj.mechanism);
    j["rho"] = traj.rho;
    if (traj.mechanism == MechanismKind::DROChi2) j["radius"] = traj.radius;
    j["schema"] = schema_kind_name(traj.schema);
    j["seed"] = traj.seed;
    j["tau"] = traj.tau;
    j["verdict"] = traj.verdict.to_string();
    j["max_point_loss_seen"] = traj.max_point_loss_seen;
    j["loss_sup_ok"] = traj.loss_sup_ok;
    if (!traj.overrides.empty()) {
        nlohmann::json jo = nlohmann::json::object();
        for (const auto& [k, v] : traj.overrides) jo[k] = v;
        j["overrides"] = std::move(jo);
    }
    j["points"] = nlohmann::json::array();
    for (const auto& p : traj.points) {
        nlohmann::json jp;
        jp["t"] = p.t;
        jp["theta"] = p.theta;
        jp["fractions"] = p.fractions;
        jp["group_losses"] = p.group_losses;
        jp["perf_loss"] = p.perf_loss;
        jp["loss_disparity"] = p.loss_disparity;
        jp["participation_disparity"] = p.participation_disparity;
        jp["step_norm"] = p.step_norm;
        jp["w1_step"] = p.w1_step;
        if (p.n_samples > 0) jp["n_samples"] = p.n_samples;
        j["points"].push_back(std::move(jp));
    }
    return j.dump(2);
}

}  // namespace perfsim
