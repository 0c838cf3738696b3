#include "perfsim/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace perfsim {

namespace {

std::vector<double> project(const Objective& obj, std::vector<double> x) {
    for (int i = 0; i < obj.dimension; ++i) x[i] = std::min(std::max(x[i], obj.box_lo[i]), obj.box_hi[i]);
    return x;
}

// Stationarity for box-constrained descent: ||x - P(x - g)||.
double projected_grad_norm(const Objective& obj, const std::vector<double>& x,
                           const std::vector<double>& g) {
    double s = 0.0;
    for (int i = 0; i < obj.dimension; ++i) {
        const double moved = std::min(std::max(x[i] - g[i], obj.box_lo[i]), obj.box_hi[i]);
        const double d = x[i] - moved;
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace

SolveResult minimize_smooth_convex(const Objective& obj, std::vector<double> theta0, double tol,
                                   int max_iters) {
    if (!obj.gradient) fail(Errc::NonDifferentiableFamily, "objective has no gradient");
    if (!(tol > 0.0)) fail(Errc::ValidationError, "tol must be positive");

    std::vector<double> x = project(obj, std::move(theta0));
    double fx = obj.value(x);
    double alpha = 1.0;
    constexpr double kArmijo = 1e-4;

    for (int it = 0; it < max_iters; ++it) {
        const auto g = obj.gradient(x);
        const double stat = projected_grad_norm(obj, x, g);
        if (stat <= tol) return {x, it, stat};

        // Backtracking along the projection arc.
        alpha = std::min(alpha * 2.0, 1e8);
        bool stepped = false;
        for (int bt = 0; bt < 80; ++bt) {
            std::vector<double> cand(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) cand[i] = x[i] - alpha * g[i];
            cand = project(obj, cand);
            double decrease = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) decrease += g[i] * (x[i] - cand[i]);
            const double fc = obj.value(cand);
            if (fc <= fx - kArmijo * decrease && fc <= fx) {
                x = std::move(cand);
                fx = fc;
                stepped = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!stepped) {
            // Step underflow: no descent direction at floating-point scale.
            const double stat2 = projected_grad_norm(obj, x, obj.gradient(x));
            if (stat2 <= tol * 16) return {x, it + 1, stat2};
            fail(Errc::DidNotConverge, "line search stalled with gradient norm " +
                                           std::to_string(stat2));
        }
    }
    const double stat = projected_grad_norm(obj, x, obj.gradient(x));
    if (stat <= tol) return {x, max_iters, stat};
    fail(Errc::DidNotConverge,
         "max iterations reached with gradient norm " + std::to_string(stat));
}

SolveResult minimize_multistart_1d(const Objective& obj, const std::vector<double>& theta0, double tol,
                                   int max_iters, int starts) {
    if (obj.dimension != 1) return minimize_smooth_convex(obj, theta0, tol, max_iters);

    std::vector<double> candidates;
    candidates.push_back(theta0.at(0));
    const double lo = obj.box_lo[0], hi = obj.box_hi[0];
    for (int i = 0; i < starts; ++i)
        candidates.push_back(lo + (hi - lo) * (i + 0.5) / starts);

    SolveResult best;
    double best_val = std::numeric_limits<double>::infinity();
    bool have = false;
    for (double c : candidates) {
        SolveResult r = minimize_smooth_convex(obj, {c}, tol, max_iters);
        const double v = obj.value(r.theta);
        if (!have || v < best_val - 1e-12 ||
            (std::abs(v - best_val) <= 1e-12 && r.theta[0] < best.theta[0])) {
            best = std::move(r);
            best_val = v;
            have = true;
        }
    }
    return best;
}

double best_threshold_1d(const PopulationState& pop) {
    if (pop.dimension != 1) fail(Errc::NotOneDimensional, "threshold model needs 1-D features");

    struct Pt {
        double x;
        double w;
        double y;
    };
    std::vector<Pt> pts;
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        for (const auto& ws : pop.groups[g].points) {
            const double y = ws.sample.label;
            if (y != 0.0 && y != 1.0)
                fail(Errc::NotBinaryLabels, "labels must be 0/1 for the threshold solver");
            pts.push_back({ws.sample.features[0], pop.fractions[g] * ws.weight, y});
        }
    }
    std::sort(pts.begin(), pts.end(), [](const Pt& a, const Pt& b) { return a.x < b.x; });

    // Accuracy of threshold t: points below t predicted 0, at/above predicted 1.
    // Scanning left to right, moving the threshold past point i flips its
    // prediction from 1 to 0.
    double total_pos = 0.0;
    for (const auto& p : pts) total_pos += p.w * p.y;

    double best_acc = total_pos;  // threshold below the support: all predicted 1
    double best_thr = pts.front().x - 1.0;
    double acc = total_pos;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        acc += pts[i].y == 0.0 ? pts[i].w : -pts[i].w;
        // Skip ties in x: the threshold can only sit strictly between distinct
        // support values (or outside the support).
        if (i + 1 < pts.size() && pts[i + 1].x == pts[i].x) continue;
        const double thr =
            i + 1 < pts.size() ? 0.5 * (pts[i].x + pts[i + 1].x) : pts.back().x + 1.0;
        if (acc > best_acc + 1e-15) {
            best_acc = acc;
            best_thr = thr;
        }
    }
    return best_thr;
}

double grid_search_oracle(const Objective& obj, double lo, double hi, double step) {
    if (obj.dimension != 1) fail(Errc::DimensionUnsupported, "grid oracle is 1-D only");
    if (!(step > 0.0)) fail(Errc::ValidationError, "step must be positive");
    double best_x = lo;
    double best_v = obj.value({lo});
    for (double x = lo + step; x <= hi + step * 0.5; x += step) {
        const double v = obj.value({std::min(x, hi)});
        if (v < best_v) {
            best_v = v;
            best_x = std::min(x, hi);
        }
    }
    return best_x;
}

}  // namespace perfsim
