#include "perfsim/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace perfsim {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_compat(const LossSpec& spec, const Model& model, const Sample& sample) {
    const auto bad = [&](const char* why) {
        fail(Errc::IncompatibleModel, std::string(why) + " (loss " + loss_family_name(spec.family) +
                                          ", model " + model_family_name(model.family) + ")");
    };
    switch (spec.family) {
        case LossFamily::SquaredError:
            if (model.family != ModelFamily::Linear) bad("squared error needs a linear model");
            break;
        case LossFamily::LogisticNLL:
            if (model.family != ModelFamily::Logistic) bad("logistic NLL needs a logistic model");
            break;
        case LossFamily::ScalarMeanSquared:
            if (model.family != ModelFamily::ScalarMean) bad("scalar mean loss needs a scalar model");
            break;
        case LossFamily::ZeroOne:
            if (model.family != ModelFamily::Threshold1d) bad("0-1 loss needs a 1-D threshold model");
            break;
    }
    if (model.family == ModelFamily::Linear || model.family == ModelFamily::Logistic) {
        if (model.theta.size() != sample.features.size()) bad("theta/feature dimension mismatch");
    }
    if (model.family == ModelFamily::Threshold1d && sample.features.size() != 1)
        bad("threshold model needs 1-D features");
}

double softplus(double z) {
    // log(1 + e^z) without overflow.
    if (z > 0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

const char* model_family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::Linear: return "linear";
        case ModelFamily::Logistic: return "logistic";
        case ModelFamily::ScalarMean: return "scalar_mean";
        case ModelFamily::Threshold1d: return "threshold_1d";
    }
    return "?";
}

ModelFamily model_family_from_name(const std::string& name) {
    if (name == "linear") return ModelFamily::Linear;
    if (name == "logistic") return ModelFamily::Logistic;
    if (name == "scalar_mean") return ModelFamily::ScalarMean;
    if (name == "threshold_1d") return ModelFamily::Threshold1d;
    fail(Errc::ValidationError, "unknown model family '" + name + "'");
}

const char* loss_family_name(LossFamily f) {
    switch (f) {
        case LossFamily::SquaredError: return "squared_error";
        case LossFamily::LogisticNLL: return "logistic_nll";
        case LossFamily::ScalarMeanSquared: return "scalar_mean_squared";
        case LossFamily::ZeroOne: return "zero_one";
    }
    return "?";
}

LossFamily loss_family_from_name(const std::string& name) {
    if (name == "squared_error") return LossFamily::SquaredError;
    if (name == "logistic_nll") return LossFamily::LogisticNLL;
    if (name == "scalar_mean_squared") return LossFamily::ScalarMeanSquared;
    if (name == "zero_one") return LossFamily::ZeroOne;
    fail(Errc::ValidationError, "unknown loss family '" + name + "'");
}

const char* mechanism_name(MechanismKind k) {
    switch (k) {
        case MechanismKind::Plain: return "plain";
        case MechanismKind::GLP: return "glp";
        case MechanismKind::SLP: return "slp";
        case MechanismKind::RW: return "rw";
        case MechanismKind::GLV: return "glv";
        case MechanismKind::DROChi2: return "dro_chi2";
    }
    return "?";
}

MechanismKind mechanism_from_name(const std::string& name) {
    if (name == "plain") return MechanismKind::Plain;
    if (name == "glp") return MechanismKind::GLP;
    if (name == "slp") return MechanismKind::SLP;
    if (name == "rw") return MechanismKind::RW;
    if (name == "glv") return MechanismKind::GLV;
    if (name == "dro_chi2") return MechanismKind::DROChi2;
    fail(Errc::ValidationError, "unknown mechanism '" + name + "'");
}

double point_loss(const LossSpec& spec, const Model& model, const Sample& sample) {
    check_compat(spec, model, sample);
    switch (spec.family) {
        case LossFamily::SquaredError: {
            const double r = sample.label - dot(model.theta, sample.features);
            return r * r;
        }
        case LossFamily::LogisticNLL: {
            const double z = dot(model.theta, sample.features);
            return softplus(z) - sample.label * z;
        }
        case LossFamily::ScalarMeanSquared: {
            const double r = sample.label - model.theta.at(0);
            return r * r;
        }
        case LossFamily::ZeroOne: {
            const double pred = sample.features[0] >= model.theta.at(0) ? 1.0 : 0.0;
            return pred == sample.label ? 0.0 : 1.0;
        }
    }
    return 0.0;
}

std::vector<double> point_loss_grad(const LossSpec& spec, const Model& model, const Sample& sample) {
    if (!spec.differentiable())
        fail(Errc::NonDifferentiableFamily, "0-1 loss has no gradient");
    check_compat(spec, model, sample);
    switch (spec.family) {
        case LossFamily::SquaredError: {
            const double r = dot(model.theta, sample.features) - sample.label;
            std::vector<double> g(sample.features.size());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * r * sample.features[i];
            return g;
        }
        case LossFamily::LogisticNLL: {
            const double z = dot(model.theta, sample.features);
            const double r = sigmoid(z) - sample.label;
            std::vector<double> g(sample.features.size());
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = r * sample.features[i];
            return g;
        }
        case LossFamily::ScalarMeanSquared:
            return {2.0 * (model.theta.at(0) - sample.label)};
        case LossFamily::ZeroOne: break;
    }
    return {};
}

double group_expected_loss(const LossSpec& spec, const Model& model, const GroupDistribution& group) {
    double s = 0.0;
    for (const auto& ws : group.points) s += ws.weight * point_loss(spec, model, ws.sample);
    return s;
}

std::vector<double> group_expected_loss_grad(const LossSpec& spec, const Model& model,
                                             const GroupDistribution& group) {
    std::vector<double> g(model.theta.size(), 0.0);
    for (const auto& ws : group.points) {
        const auto pg = point_loss_grad(spec, model, ws.sample);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += ws.weight * pg[i];
    }
    return g;
}

double weighted_group_loss(const Model& model, const LossSpec& spec, const PopulationState& pop,
                           const std::vector<double>& q) {
    if (q.size() != pop.groups.size())
        fail(Errc::WeightMismatch, "weight vector length does not match group count");
    double s = 0.0;
    for (std::size_t g = 0; g < pop.groups.size(); ++g)
        s += q[g] * group_expected_loss(spec, model, pop.groups[g]);
    return s;
}

std::vector<double> weighted_group_loss_grad(const Model& model, const LossSpec& spec,
                                             const PopulationState& pop, const std::vector<double>& q) {
    if (q.size() != pop.groups.size())
        fail(Errc::WeightMismatch, "weight vector length does not match group count");
    std::vector<double> g(model.theta.size(), 0.0);
    for (std::size_t k = 0; k < pop.groups.size(); ++k) {
        const auto gg = group_expected_loss_grad(spec, model, pop.groups[k]);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += q[k] * gg[i];
    }
    return g;
}

double mixture_expected_loss(const Model& model, const LossSpec& spec, const PopulationState& pop) {
    return weighted_group_loss(model, spec, pop, pop.fractions);
}

std::vector<double> mixture_expected_loss_grad(const Model& model, const LossSpec& spec,
                                               const PopulationState& pop) {
    return weighted_group_loss_grad(model, spec, pop, pop.fractions);
}

double glp_objective(const Model& model, const PopulationState& pop, const LossSpec& spec, double rho) {
    const double base = mixture_expected_loss(model, spec, pop);
    if (rho == 0.0) return base;
    double pen = 0.0;
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        const double ls = group_expected_loss(spec, model, pop.groups[g]);
        pen += pop.fractions[g] * ls * ls;
    }
    return base + rho * pen;
}

std::vector<double> glp_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                 double rho) {
    if (rho == 0.0) return mixture_expected_loss_grad(model, spec, pop);
    std::vector<double> g(model.theta.size(), 0.0);
    for (std::size_t k = 0; k < pop.groups.size(); ++k) {
        const double ls = group_expected_loss(spec, model, pop.groups[k]);
        const auto gg = group_expected_loss_grad(spec, model, pop.groups[k]);
        const double coef = pop.fractions[k] * (1.0 + 2.0 * rho * ls);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += coef * gg[i];
    }
    return g;
}

double slp_objective(const Model& model, const PopulationState& pop, const LossSpec& spec, double rho) {
    const double base = mixture_expected_loss(model, spec, pop);
    if (rho == 0.0) return base;
    double pen = 0.0;
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        double gp = 0.0;
        for (const auto& ws : pop.groups[g].points) {
            const double l = point_loss(spec, model, ws.sample);
            gp += ws.weight * l * l;
        }
        pen += pop.fractions[g] * gp;
    }
    return base + rho * pen;
}

std::vector<double> slp_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                 double rho) {
    if (rho == 0.0) return mixture_expected_loss_grad(model, spec, pop);
    std::vector<double> g(model.theta.size(), 0.0);
    for (std::size_t k = 0; k < pop.groups.size(); ++k) {
        for (const auto& ws : pop.groups[k].points) {
            const double l = point_loss(spec, model, ws.sample);
            const auto pg = point_loss_grad(spec, model, ws.sample);
            const double coef = pop.fractions[k] * ws.weight * (1.0 + 2.0 * rho * l);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += coef * pg[i];
        }
    }
    return g;
}

double glv_objective(const Model& model, const PopulationState& pop, const LossSpec& spec, double rho) {
    const double base = mixture_expected_loss(model, spec, pop);
    if (rho == 0.0) return base;
    double pen = 0.0;
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        const double d = group_expected_loss(spec, model, pop.groups[g]) - base;
        pen += pop.fractions[g] * d * d;
    }
    return base + rho * pen;
}

std::vector<double> glv_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                 double rho) {
    const auto base_grad = mixture_expected_loss_grad(model, spec, pop);
    if (rho == 0.0) return base_grad;
    const double base = mixture_expected_loss(model, spec, pop);
    std::vector<double> g = base_grad;
    for (std::size_t k = 0; k < pop.groups.size(); ++k) {
        const double d = group_expected_loss(spec, model, pop.groups[k]) - base;
        const auto gg = group_expected_loss_grad(spec, model, pop.groups[k]);
        const double coef = 2.0 * rho * pop.fractions[k] * d;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += coef * (gg[i] - base_grad[i]);
    }
    return g;
}

std::vector<double> rw_weights(const std::vector<double>& p, const std::vector<double>& l, double rho) {
    if (p.size() != l.size()) fail(Errc::WeightMismatch, "p and l length mismatch");
    if (rho < 0.0) fail(Errc::ValidationError, "rho must be nonnegative");
    if (rho == 0.0) return p;
    std::vector<double> q(p.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        q[i] = p[i] + rho * l[i];
        norm += std::abs(q[i]);
    }
    for (double& v : q) v /= norm;
    return q;
}

double rw_objective(const Model& model, const PopulationState& pop, const LossSpec& spec,
                    const std::vector<double>& q) {
    return weighted_group_loss(model, spec, pop, q);
}

std::vector<double> rw_gradient(const Model& model, const PopulationState& pop, const LossSpec& spec,
                                const std::vector<double>& q) {
    return weighted_group_loss_grad(model, spec, pop, q);
}

std::vector<double> chi2_worst_weights(const std::vector<double>& p,
                                       const std::vector<double>& group_losses, double radius) {
    const std::size_t n = p.size();
    if (radius < 0.0) fail(Errc::NegativeRadius, "chi^2 radius must be nonnegative");
    if (n > 8) fail(Errc::TooManyGroups, "chi2_worst_weights supports at most 8 groups");
    if (group_losses.size() != n) fail(Errc::WeightMismatch, "losses/fractions length mismatch");
    if (radius == 0.0) return p;

    if (n == 2) {
        const double la = group_losses[0], lb = group_losses[1];
        if (la == lb) return p;
        double delta = std::sqrt(radius * p[0] * p[1]);
        // Clip so neither weight goes negative.
        delta = std::min({delta, la > lb ? p[1] : p[0]});
        std::vector<double> q = p;
        if (la > lb) {
            q[0] += delta;
            q[1] -= delta;
        } else {
            q[0] -= delta;
            q[1] += delta;
        }
        return q;
    }

    // Maximize sum delta_s L_s with sum delta_s = 0 and sum delta_s^2/p_s <= r:
    // delta = t * p (L - Lbar) on the free set; zeroed coordinates consume
    // p_s of the budget and their mass is redistributed proportionally.
    std::vector<bool> active(n, true);
    std::vector<double> q(p);
    for (int pass = 0; pass < static_cast<int>(n); ++pass) {
        double freed = 0.0, budget_used = 0.0;
        double pf = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i]) {
                pf += p[i];
            } else {
                freed += p[i];
                budget_used += p[i];  // chi2 cost of q_i = 0 is p_i
            }
        }
        double lbar = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) lbar += p[i] * group_losses[i];
        lbar /= pf;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (active[i]) var += p[i] * (group_losses[i] - lbar) * (group_losses[i] - lbar);

        const double mass_shift = freed;  // must be re-absorbed by the free set
        const double mass_cost = pf > 0 ? mass_shift * mass_shift / pf : 0.0;
        const double rem = radius - budget_used - mass_cost;
        const double t = (var > 1e-30 && rem > 0) ? std::sqrt(rem / var) : 0.0;

        bool clipped = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (!active[i]) {
                q[i] = 0.0;
                continue;
            }
            q[i] = p[i] + t * p[i] * (group_losses[i] - lbar) + mass_shift * p[i] / pf;
            if (q[i] < 0.0) {
                active[i] = false;
                clipped = true;
            }
        }
        if (!clipped) break;
    }
    for (double& v : q) v = std::max(v, 0.0);
    double s = std::accumulate(q.begin(), q.end(), 0.0);
    for (double& v : q) v /= s;
    return q;
}

double tilde_beta(MechanismKind kind, double rho, double loss_sup, double beta) {
    if (rho < 0.0 || loss_sup < 0.0 || beta < 0.0)
        fail(Errc::ValidationError, "tilde_beta needs nonnegative rho, loss_sup, beta");
    switch (kind) {
        case MechanismKind::Plain: return beta;
        case MechanismKind::GLP:
        case MechanismKind::SLP: return (2.0 * rho * loss_sup + 1.0) * beta;
        case MechanismKind::RW: return (rho * loss_sup + 1.0) * beta;
        case MechanismKind::GLV:
        case MechanismKind::DROChi2:
            fail(Errc::NoCertificate,
                 std::string("no effective-smoothness certificate for ") + mechanism_name(kind));
    }
    return beta;
}

}  // namespace perfsim
