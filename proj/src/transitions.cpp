#include "perfsim/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace perfsim {

namespace {

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

std::vector<double> group_losses(const TransitionSpec&, const LossSpec& loss, const Model& model,
                                 const PopulationState& pop) {
    std::vector<double> out(pop.groups.size());
    for (std::size_t g = 0; g < pop.groups.size(); ++g)
        out[g] = group_expected_loss(loss, model, pop.groups[g]);
    return out;
}

PopulationState with_fractions(const PopulationState& pop, std::vector<double> fractions) {
    PopulationState out = pop;
    double s = std::accumulate(fractions.begin(), fractions.end(), 0.0);
    for (double& f : fractions) f /= s;
    out.fractions = std::move(fractions);
    out.validate();
    return out;
}

PopulationState linear_retention(const TransitionSpec& spec, const Model& model,
                                 const PopulationState& pop, const LossSpec& loss) {
    if (pop.group_count() != 2)
        fail(Errc::GroupCountMismatch, "linear retention is defined for two groups");
    const auto ls = group_losses(spec, loss, model, pop);
    const double pa = clampd(pop.fractions[0] + spec.rate * (ls[1] - ls[0]), spec.clamp_lo,
                             spec.clamp_hi);
    PopulationState out = pop;
    out.fractions = {pa, 1.0 - pa};
    out.validate();
    return out;
}

PopulationState ratio_retention(const TransitionSpec& spec, const Model& model,
                                const PopulationState& pop, const LossSpec& loss) {
    if (pop.group_count() != 2)
        fail(Errc::GroupCountMismatch, "ratio retention is defined for two groups");
    if (spec.p_min.size() != 2) fail(Errc::BadTransitionParams, "ratio retention needs 2 p_min entries");
    const double pmin_sum = spec.p_min[0] + spec.p_min[1];
    if (spec.p_min[0] < 0 || spec.p_min[1] < 0 || pmin_sum >= 1.0)
        fail(Errc::BadTransitionParams, "p_min must be nonnegative with sum < 1");
    const auto ls = group_losses(spec, loss, model, pop);
    const double denom = ls[0] + ls[1];
    std::vector<double> r(2);
    for (int s = 0; s < 2; ++s) {
        const double other = ls[1 - s];
        const double share = denom > 0.0 ? other / denom : 0.5;
        r[s] = (1.0 - pmin_sum) * 0.5 * (pop.fractions[s] + share) + spec.p_min[s];
    }
    return with_fractions(pop, std::move(r));
}

PopulationState multigroup_ratio_retention(const TransitionSpec& spec, const Model& model,
                                           const PopulationState& pop, const LossSpec& loss) {
    const std::size_t n = pop.groups.size();
    if (spec.p_min.size() != n)
        fail(Errc::BadTransitionParams, "p_min length must match group count");
    double pmin_sum = 0.0;
    for (double v : spec.p_min) {
        if (v < 0) fail(Errc::BadTransitionParams, "p_min must be nonnegative");
        pmin_sum += v;
    }
    if (pmin_sum >= 1.0) fail(Errc::BadTransitionParams, "sum of p_min must be < 1");

    const auto ls = group_losses(spec, loss, model, pop);
    // Ascending loss order, ties broken by group index; group with the i-th
    // smallest loss is paired with the (n-1-i)-th smallest one's loss.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (ls[a] != ls[b]) return ls[a] < ls[b];
        return a < b;
    });
    std::vector<double> paired(n);
    for (std::size_t rank = 0; rank < n; ++rank)
        paired[order[rank]] = ls[order[n - 1 - rank]];

    const double denom = std::accumulate(ls.begin(), ls.end(), 0.0);
    std::vector<double> r(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double share = denom > 0.0 ? paired[s] / denom : 1.0 / n;
        r[s] = (1.0 - pmin_sum) * 0.5 * (pop.fractions[s] + share) + spec.p_min[s];
    }
    return with_fractions(pop, std::move(r));
}

PopulationState strategic_shift(const TransitionSpec& spec, const Model& model,
                                const PopulationState& pop) {
    PopulationState out = pop;
    const auto manipulable = [&](std::size_t j) {
        if (spec.feature_mask.empty()) return true;
        return j < spec.feature_mask.size() && spec.feature_mask[j] != 0;
    };
    for (auto& g : out.groups) {
        for (auto& ws : g.points) {
            const auto& base = ws.sample.base();
            if (ws.sample.anchor.empty()) ws.sample.anchor = ws.sample.features;
            for (std::size_t j = 0; j < ws.sample.features.size(); ++j) {
                if (manipulable(j) && j < model.theta.size())
                    ws.sample.features[j] = base[j] - spec.epsilon * model.theta[j];
                else
                    ws.sample.features[j] = base[j];
            }
        }
    }
    return out;
}

PopulationState budget_improvement(const TransitionSpec& spec, const Model& model,
                                   const PopulationState& pop) {
    if (spec.budgets.size() != pop.groups.size())
        fail(Errc::BadTransitionParams, "budgets length must match group count");
    if (pop.dimension != 1)
        fail(Errc::DimensionUnsupported, "budget improvement is defined for 1-D features");
    PopulationState out = pop;
    for (std::size_t g = 0; g < out.groups.size(); ++g) {
        const double eta = spec.budgets[g];
        for (auto& ws : out.groups[g].points) {
            const double base = ws.sample.base()[0];
            if (ws.sample.anchor.empty()) ws.sample.anchor = ws.sample.features;
            ws.sample.features[0] = base + eta * model.theta.at(0);
        }
    }
    return out;
}

PopulationState theta_fraction(const TransitionSpec& spec, const Model& model,
                               const PopulationState& pop) {
    if (pop.group_count() != 2)
        fail(Errc::GroupCountMismatch, "theta_fraction is defined for two groups");
    if (model.theta.size() != 1)
        fail(Errc::DimensionUnsupported, "theta_fraction needs a scalar parameter");
    const double pa = clampd(spec.intercept + spec.slope * model.theta[0], spec.clamp_lo,
                             spec.clamp_hi);
    PopulationState out = pop;
    out.fractions = {pa, 1.0 - pa};
    out.validate();
    return out;
}

}  // namespace

const char* transition_kind_name(TransitionKind k) {
    switch (k) {
        case TransitionKind::LinearRetention: return "linear_retention";
        case TransitionKind::RatioRetention: return "ratio_retention";
        case TransitionKind::MultiGroupRatioRetention: return "multigroup_ratio_retention";
        case TransitionKind::StrategicShift: return "strategic_shift";
        case TransitionKind::BudgetImprovement: return "budget_improvement";
        case TransitionKind::ThetaFraction: return "theta_fraction";
        case TransitionKind::Composite: return "composite";
    }
    return "?";
}

TransitionKind transition_kind_from_name(const std::string& name) {
    if (name == "linear_retention") return TransitionKind::LinearRetention;
    if (name == "ratio_retention") return TransitionKind::RatioRetention;
    if (name == "multigroup_ratio_retention") return TransitionKind::MultiGroupRatioRetention;
    if (name == "strategic_shift") return TransitionKind::StrategicShift;
    if (name == "budget_improvement") return TransitionKind::BudgetImprovement;
    if (name == "theta_fraction") return TransitionKind::ThetaFraction;
    if (name == "composite") return TransitionKind::Composite;
    fail(Errc::ValidationError, "unknown transition kind '" + name + "'");
}

const char* schema_kind_name(SchemaKind k) {
    switch (k) {
        case SchemaKind::Conventional: return "conventional";
        case SchemaKind::KDelayed: return "k_delayed";
        case SchemaKind::Delayed: return "delayed";
    }
    return "?";
}

SchemaKind schema_kind_from_name(const std::string& name) {
    if (name == "conventional") return SchemaKind::Conventional;
    if (name == "k_delayed") return SchemaKind::KDelayed;
    if (name == "delayed") return SchemaKind::Delayed;
    fail(Errc::ValidationError, "unknown deployment schema '" + name + "'");
}

PopulationState apply_transition(const TransitionSpec& spec, const Model& model,
                                 const PopulationState& pop, const LossSpec& loss) {
    switch (spec.kind) {
        case TransitionKind::LinearRetention: return linear_retention(spec, model, pop, loss);
        case TransitionKind::RatioRetention: return ratio_retention(spec, model, pop, loss);
        case TransitionKind::MultiGroupRatioRetention:
            return multigroup_ratio_retention(spec, model, pop, loss);
        case TransitionKind::StrategicShift: return strategic_shift(spec, model, pop);
        case TransitionKind::BudgetImprovement: return budget_improvement(spec, model, pop);
        case TransitionKind::ThetaFraction: return theta_fraction(spec, model, pop);
        case TransitionKind::Composite: {
            if (spec.children.empty())
                fail(Errc::BadTransitionParams, "composite transition needs children");
            PopulationState cur = pop;
            for (const auto& child : spec.children) cur = apply_transition(child, model, cur, loss);
            return cur;
        }
    }
    fail(Errc::BadTransitionParams, "unhandled transition kind");
}

int compute_delay_r(double epsilon_assumed, double w1_first_step, double delta) {
    if (!(epsilon_assumed > 0.0 && epsilon_assumed < 1.0))
        fail(Errc::InvalidEpsilon, "delayed schema needs epsilon in (0,1)");
    if (delta <= 0.0) fail(Errc::ValidationError, "delta must be positive");
    if (w1_first_step < 0.0) fail(Errc::ValidationError, "w1_first_step must be nonnegative");
    if (w1_first_step <= delta) return 1;
    const double r = std::log(w1_first_step / delta) / std::log(1.0 / epsilon_assumed);
    return static_cast<int>(std::ceil(r)) + 1;
}

PopulationState apply_schema(const TransitionSpec& spec, const DeploymentSchema& schema,
                             const Model& model, const PopulationState& pop, const LossSpec& loss,
                             int cached_delay_reps) {
    switch (schema.kind) {
        case SchemaKind::Conventional: return apply_transition(spec, model, pop, loss);
        case SchemaKind::KDelayed: {
            if (schema.k < 1) fail(Errc::ValidationError, "k-delayed schema needs k >= 1");
            PopulationState cur = pop;
            for (int i = 0; i < schema.k; ++i) cur = apply_transition(spec, model, cur, loss);
            return cur;
        }
        case SchemaKind::Delayed: {
            PopulationState first = apply_transition(spec, model, pop, loss);
            int reps = cached_delay_reps;
            if (reps < 1) {
                const double w1 = population_distance(pop, first);
                reps = compute_delay_r(schema.epsilon_assumed, w1, schema.delta);
            }
            PopulationState cur = std::move(first);
            for (int i = 1; i < reps; ++i) cur = apply_transition(spec, model, cur, loss);
            return cur;
        }
    }
    fail(Errc::ValidationError, "unhandled schema kind");
}

double estimate_sensitivity(const TransitionSpec& spec, const LossSpec& loss,
                            const std::vector<SensitivityProbe>& probes) {
    double best = 0.0;
    for (const auto& probe : probes) {
        double dist = 0.0;
        for (std::size_t i = 0; i < probe.model_a.theta.size(); ++i) {
            const double d = probe.model_a.theta[i] - probe.model_b.theta[i];
            dist += d * d;
        }
        dist = std::sqrt(dist);
        if (dist == 0.0) fail(Errc::DegenerateProbe, "probe models are identical");
        const auto ta = apply_transition(spec, probe.model_a, probe.pop, loss);
        const auto tb = apply_transition(spec, probe.model_b, probe.pop, loss);
        best = std::max(best, population_distance(ta, tb) / dist);
    }
    // D-perturbation ratios over probe pairs sharing a model.
    for (std::size_t i = 0; i < probes.size(); ++i) {
        for (std::size_t j = 0; j < probes.size(); ++j) {
            if (i == j) continue;
            if (probes[i].model_a.theta != probes[j].model_a.theta) continue;
            const double din = population_distance(probes[i].pop, probes[j].pop);
            if (din < 1e-12) continue;
            const auto ta = apply_transition(spec, probes[i].model_a, probes[i].pop, loss);
            const auto tb = apply_transition(spec, probes[j].model_a, probes[j].pop, loss);
            best = std::max(best, population_distance(ta, tb) / din);
        }
    }
    return best;
}

}  // namespace perfsim
