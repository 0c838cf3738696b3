#include "perfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace perfsim {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

double loss_disparity(const std::vector<double>& group_losses) {
    if (group_losses.size() < 2) fail(Errc::SingleGroup, "loss disparity needs >= 2 groups");
    const auto [mn, mx] = std::minmax_element(group_losses.begin(), group_losses.end());
    return *mx - *mn;
}

double loss_disparity(const Model& model, const PopulationState& pop, const LossSpec& loss) {
    if (pop.groups.size() < 2) fail(Errc::SingleGroup, "loss disparity needs >= 2 groups");
    std::vector<double> ls(pop.groups.size());
    for (std::size_t g = 0; g < pop.groups.size(); ++g)
        ls[g] = group_expected_loss(loss, model, pop.groups[g]);
    return loss_disparity(ls);
}

double participation_disparity(const std::vector<double>& fractions) {
    if (fractions.size() < 2) fail(Errc::SingleGroup, "participation disparity needs >= 2 groups");
    const auto [mn, mx] = std::minmax_element(fractions.begin(), fractions.end());
    return *mx - *mn;
}

double participation_disparity(const PopulationState& pop) {
    return participation_disparity(pop.fractions);
}

std::vector<double> contraction_ratios(const Trajectory& traj) {
    if (traj.points.size() < 3) fail(Errc::TooShort, "need >= 3 points for contraction ratios");
    std::vector<double> out;
    for (std::size_t t = 1; t + 1 < traj.points.size(); ++t) {
        const double dt = traj.points[t].step_norm + traj.points[t].w1_step;
        const double dn = traj.points[t + 1].step_norm + traj.points[t + 1].w1_step;
        if (dt < 1e-12) continue;
        out.push_back(dn / dt);
    }
    return out;
}

StabilityCertificate certificate(const LossSpec& loss, MechanismKind mechanism, double rho,
                                 double epsilon, bool epsilon_estimated, SchemaCondition condition) {
    if (!loss.gamma || !loss.beta || !loss.loss_sup)
        fail(Errc::NoCertificate, "certificate needs gamma, beta and loss_sup");
    StabilityCertificate cert;
    cert.gamma = *loss.gamma;
    cert.beta = *loss.beta;
    cert.tilde_beta = tilde_beta(mechanism, rho, *loss.loss_sup, *loss.beta);
    cert.epsilon = epsilon;
    cert.epsilon_estimated = epsilon_estimated;
    cert.lhs = epsilon * (1.0 + cert.tilde_beta / cert.gamma);
    cert.condition = condition;
    cert.holds = cert.lhs < cert.threshold();
    return cert;
}

double assumption1_fraction(const Trajectory& traj) {
    int hold = 0, total = 0;
    for (const auto& p : traj.points) {
        if (p.fractions.size() < 2 || p.group_losses.size() != p.fractions.size()) continue;
        const std::size_t maj =
            std::max_element(p.fractions.begin(), p.fractions.end()) - p.fractions.begin();
        const std::size_t low =
            std::min_element(p.group_losses.begin(), p.group_losses.end()) - p.group_losses.begin();
        ++total;
        if (maj == low) ++hold;
    }
    return total > 0 ? static_cast<double>(hold) / total : 0.0;
}

MonotonicityReport monotonicity_report(const EngineConfig& base, MechanismKind mechanism,
                                       const std::vector<double>& rho_list, double tau) {
    for (std::size_t i = 1; i < rho_list.size(); ++i)
        if (rho_list[i] < rho_list[i - 1])
            fail(Errc::ValidationError, "rho list must be sorted ascending");

    MonotonicityReport report;
    report.mechanism = mechanism;
    for (double rho : rho_list) {
        MonotonicityRow row;
        row.rho = rho;
        EngineConfig cfg = base;
        cfg.mechanism = {mechanism, rho, 0.0};
        cfg.tau = tau;
        try {
            FairPsResult ps = find_fair_ps(cfg);
            const auto& last = ps.trajectory.back();
            row.loss_disparity_ps = last.loss_disparity;
            row.participation_disparity_ps = last.participation_disparity;
            row.verdict = ps.trajectory.verdict.to_string();
            row.assumption1_fraction = assumption1_fraction(ps.trajectory);
        } catch (const Error& e) {
            row.error = e.what();
            row.verdict = "error";
        }
        report.rows.push_back(std::move(row));
    }
    for (std::size_t i = 1; i < report.rows.size(); ++i) {
        if (!report.rows[i].error.empty() || !report.rows[i - 1].error.empty()) continue;
        if (report.rows[i].loss_disparity_ps >
            report.rows[i - 1].loss_disparity_ps + 1e-6)
            report.rows[i].flagged = true;
    }
    return report;
}

std::string MonotonicityReport::to_csv() const {
    std::ostringstream out;
    out << "rho,loss_disparity_ps,participation_disparity_ps,verdict,assumption1_fraction,flagged\n";
    for (const auto& r : rows) {
        out << fmt(r.rho) << "," << fmt(r.loss_disparity_ps) << ","
            << fmt(r.participation_disparity_ps) << ","
            << (r.error.empty() ? r.verdict : ("error:" + r.error)) << ","
            << fmt(r.assumption1_fraction) << "," << (r.flagged ? 1 : 0) << "\n";
    }
    return out.str();
}

}  // namespace perfsim
