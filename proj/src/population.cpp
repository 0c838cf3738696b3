#include "perfsim/population.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

namespace perfsim {

namespace {

constexpr double kWeightSumTol = 1e-12;
constexpr double kFractionSumTol = 1e-9;

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Flattened joint coordinates (features, label) for the multi-d metric.
std::vector<std::pair<std::vector<double>, double>> flatten_joint(const PopulationState& pop) {
    std::vector<std::pair<std::vector<double>, double>> out;
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        for (const auto& ws : pop.groups[g].points) {
            std::vector<double> z = ws.sample.features;
            z.push_back(ws.sample.label);
            out.emplace_back(std::move(z), pop.fractions[g] * ws.weight);
        }
    }
    return out;
}

// Exact min-cost perfect matching (Hungarian with potentials), O(n^3).
double assignment_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j
    for (int i = 1; i <= n; ++i) {
        std::vector<double> minv(n + 1, inf);
        std::vector<bool> used(n + 1, false);
        std::vector<int> way(n + 1, 0);
        match[0] = i;
        int j0 = 0;
        do {
            used[j0] = true;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[match[j] - 1][j - 1];
    return total;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

double GroupDistribution::total_weight() const {
    double s = 0.0;
    for (const auto& p : points) s += p.weight;
    return s;
}

void GroupDistribution::validate(int dimension) const {
    if (points.empty()) fail(Errc::EmptyGroup, "group " + std::to_string(group) + " has no points");
    double s = 0.0;
    for (const auto& p : points) {
        if (!(p.weight > 0.0))
            fail(Errc::FractionSumInvalid,
                 "nonpositive point weight in group " + std::to_string(group));
        if (static_cast<int>(p.sample.features.size()) != dimension)
            fail(Errc::DimensionMismatch, "sample dimension mismatch in group " + std::to_string(group));
        s += p.weight;
    }
    if (std::abs(s - 1.0) > kWeightSumTol * std::max<double>(1, points.size()))
        fail(Errc::FractionSumInvalid,
             "point weights in group " + std::to_string(group) + " sum to " + std::to_string(s));
}

void PopulationState::validate() const {
    if (groups.empty()) fail(Errc::EmptyGroup, "population has no groups");
    if (fractions.size() != groups.size())
        fail(Errc::DimensionMismatch, "fractions/groups length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        groups[i].validate(dimension);
        for (std::size_t j = 0; j < i; ++j)
            if (groups[j].group == groups[i].group)
                fail(Errc::GroupCountMismatch, "duplicate group id " + std::to_string(groups[i].group));
        if (fractions[i] < -kWeightSumTol || fractions[i] > 1.0 + kWeightSumTol)
            fail(Errc::FractionSumInvalid, "fraction outside [0,1]");
        s += fractions[i];
    }
    if (std::abs(s - 1.0) > kFractionSumTol)
        fail(Errc::FractionSumInvalid, "fractions sum to " + std::to_string(s));
}

PopulationState make_population(std::vector<GroupDistribution> groups, std::vector<double> fractions) {
    if (groups.empty()) fail(Errc::EmptyGroup, "no groups given");
    if (fractions.size() != groups.size())
        fail(Errc::DimensionMismatch, "fractions length " + std::to_string(fractions.size()) +
                                          " does not match group count " + std::to_string(groups.size()));
    const int dim = groups.front().points.empty()
                        ? 0
                        : static_cast<int>(groups.front().points.front().sample.features.size());
    double s = 0.0;
    for (double f : fractions) s += f;
    if (std::abs(s - 1.0) > kFractionSumTol)
        fail(Errc::FractionSumInvalid, "fractions sum to " + std::to_string(s));
    for (double& f : fractions) f /= s;

    PopulationState pop;
    pop.groups = std::move(groups);
    pop.fractions = std::move(fractions);
    pop.dimension = dim;
    pop.validate();
    return pop;
}

std::vector<std::pair<double, double>> flatten_1d(const PopulationState& pop) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t g = 0; g < pop.groups.size(); ++g)
        for (const auto& ws : pop.groups[g].points)
            out.emplace_back(ws.sample.features.at(0), pop.fractions[g] * ws.weight);
    return out;
}

double wasserstein1_1d_points(std::vector<std::pair<double, double>> a,
                              std::vector<std::pair<double, double>> b) {
    // Normalize both masses to 1 so the CDF difference vanishes at the ends.
    double wa = 0.0, wb = 0.0;
    for (auto& p : a) wa += p.second;
    for (auto& p : b) wb += p.second;
    for (auto& p : a) p.second /= wa;
    for (auto& p : b) p.second /= wb;

    struct Event {
        double x;
        double delta;
    };
    std::vector<Event> events;
    events.reserve(a.size() + b.size());
    for (const auto& p : a) events.push_back({p.first, p.second});
    for (const auto& p : b) events.push_back({p.first, -p.second});
    std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) { return l.x < r.x; });

    double cost = 0.0, cdf_diff = 0.0;
    for (std::size_t i = 0; i + 1 <= events.size(); ++i) {
        cdf_diff += events[i].delta;
        if (i + 1 < events.size()) cost += std::abs(cdf_diff) * (events[i + 1].x - events[i].x);
    }
    return cost;
}

double wasserstein1_1d(const GroupDistribution& a, const GroupDistribution& b) {
    std::vector<std::pair<double, double>> pa, pb;
    for (const auto& ws : a.points) {
        if (ws.sample.features.size() != 1)
            fail(Errc::DimensionUnsupported, "wasserstein1_1d requires 1-D features");
        pa.emplace_back(ws.sample.features[0], ws.weight);
    }
    for (const auto& ws : b.points) {
        if (ws.sample.features.size() != 1)
            fail(Errc::DimensionUnsupported, "wasserstein1_1d requires 1-D features");
        pb.emplace_back(ws.sample.features[0], ws.weight);
    }
    return wasserstein1_1d_points(std::move(pa), std::move(pb));
}

double wasserstein1_1d(const PopulationState& a, const PopulationState& b) {
    if (a.dimension != 1 || b.dimension != 1)
        fail(Errc::DimensionUnsupported, "wasserstein1_1d requires 1-D populations");
    return wasserstein1_1d_points(flatten_1d(a), flatten_1d(b));
}

W1Estimate wasserstein1_matched(const PopulationState& a, const PopulationState& b) {
    auto pa = flatten_joint(a);
    auto pb = flatten_joint(b);

    bool resampled = false;
    auto uniformize = [&](std::vector<std::pair<std::vector<double>, double>>& pts, std::size_t n,
                          std::uint64_t seed) {
        // Deterministic weighted resample to n equally weighted points.
        std::vector<double> cdf(pts.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            acc += pts[i].second;
            cdf[i] = acc;
        }
        std::vector<std::pair<std::vector<double>, double>> out;
        out.reserve(n);
        std::uint64_t state = seed;
        for (std::size_t k = 0; k < n; ++k) {
            state = splitmix64(state);
            const double u = acc * ((state >> 11) * 0x1.0p-53);
            const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            const std::size_t idx = std::min<std::size_t>(it - cdf.begin(), pts.size() - 1);
            out.emplace_back(pts[idx].first, 1.0 / n);
        }
        pts = std::move(out);
    };

    auto uniform_weights = [](const std::vector<std::pair<std::vector<double>, double>>& pts) {
        const double w = 1.0 / pts.size();
        for (const auto& p : pts)
            if (std::abs(p.second - w) > 1e-12) return false;
        return true;
    };

    if (pa.size() != pb.size() || !uniform_weights(pa) || !uniform_weights(pb)) {
        const std::size_t n = std::max(pa.size(), pb.size());
        uniformize(pa, n, 0x5EEDA11CEull);
        uniformize(pb, n, 0x5EEDB0B5ull);
        resampled = true;
    }

    const std::size_t n = pa.size();
    if (n <= 64) {
        std::vector<std::vector<double>> cost(n, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) cost[i][j] = euclidean(pa[i].first, pb[j].first);
        return {assignment_cost(cost) / n, !resampled};
    }

    // Greedy matching, an upper bound on the exact assignment cost.
    struct Edge {
        double d;
        std::uint32_t i, j;
    };
    std::vector<Edge> edges;
    edges.reserve(n * n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j)
            edges.push_back({euclidean(pa[i].first, pb[j].first), i, j});
    std::sort(edges.begin(), edges.end(), [](const Edge& l, const Edge& r) {
        if (l.d != r.d) return l.d < r.d;
        if (l.i != r.i) return l.i < r.i;
        return l.j < r.j;
    });
    std::vector<bool> usedA(n, false), usedB(n, false);
    double total = 0.0;
    std::size_t matched = 0;
    for (const auto& e : edges) {
        if (usedA[e.i] || usedB[e.j]) continue;
        usedA[e.i] = usedB[e.j] = true;
        total += e.d;
        if (++matched == n) break;
    }
    return {total / n, false};
}

double population_distance(const PopulationState& a, const PopulationState& b) {
    if (a.dimension == 1 && b.dimension == 1) return wasserstein1_1d(a, b);
    return wasserstein1_matched(a, b).value;
}

PopulationState sample_empirical(const PopulationState& pop, int n, std::uint64_t seed) {
    if (n < 1) fail(Errc::ValidationError, "sample_empirical needs n >= 1");
    // Group CDF over fractions, then per-group CDF over point weights.
    std::vector<double> gcdf(pop.groups.size());
    double acc = 0.0;
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        acc += pop.fractions[g];
        gcdf[g] = acc;
    }
    std::vector<std::vector<double>> pcdf(pop.groups.size());
    for (std::size_t g = 0; g < pop.groups.size(); ++g) {
        double a2 = 0.0;
        pcdf[g].reserve(pop.groups[g].points.size());
        for (const auto& ws : pop.groups[g].points) {
            a2 += ws.weight;
            pcdf[g].push_back(a2);
        }
    }

    std::vector<std::vector<Sample>> drawn(pop.groups.size());
    std::uint64_t state = seed;
    auto next_u = [&]() {
        state = splitmix64(state);
        return (state >> 11) * 0x1.0p-53;
    };
    for (int k = 0; k < n; ++k) {
        const double ug = next_u() * acc;
        std::size_t g = std::lower_bound(gcdf.begin(), gcdf.end(), ug) - gcdf.begin();
        if (g >= pop.groups.size()) g = pop.groups.size() - 1;
        const double up = next_u() * pcdf[g].back();
        std::size_t i = std::lower_bound(pcdf[g].begin(), pcdf[g].end(), up) - pcdf[g].begin();
        if (i >= pop.groups[g].points.size()) i = pop.groups[g].points.size() - 1;
        drawn[g].push_back(pop.groups[g].points[i].sample);
    }

    std::vector<GroupDistribution> groups;
    std::vector<double> fractions;
    for (std::size_t g = 0; g < drawn.size(); ++g) {
        if (drawn[g].empty()) continue;
        GroupDistribution gd;
        gd.group = pop.groups[g].group;
        const double w = 1.0 / drawn[g].size();
        for (auto& s : drawn[g]) gd.points.push_back({std::move(s), w});
        groups.push_back(std::move(gd));
        fractions.push_back(static_cast<double>(drawn[g].size()) / n);
    }
    return make_population(std::move(groups), std::move(fractions));
}

std::string population_to_json(const PopulationState& pop) {
    nlohmann::json j;
    j["dimension"] = pop.dimension;
    j["fractions"] = pop.fractions;
    j["groups"] = nlohmann::json::array();
    for (const auto& g : pop.groups) {
        nlohmann::json jg;
        jg["group"] = g.group;
        jg["points"] = nlohmann::json::array();
        for (const auto& ws : g.points) {
            nlohmann::json jp;
            jp["x"] = ws.sample.features;
            jp["y"] = ws.sample.label;
            jp["w"] = ws.weight;
            if (!ws.sample.anchor.empty()) jp["anchor"] = ws.sample.anchor;
            jg["points"].push_back(std::move(jp));
        }
        j["groups"].push_back(std::move(jg));
    }
    return j.dump(2);
}

PopulationState population_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(Errc::ParseError, e.what());
    }
    std::vector<GroupDistribution> groups;
    std::vector<double> fractions = j.at("fractions").get<std::vector<double>>();
    for (const auto& jg : j.at("groups")) {
        GroupDistribution g;
        g.group = jg.at("group").get<int>();
        for (const auto& jp : jg.at("points")) {
            WeightedSample ws;
            ws.sample.features = jp.at("x").get<std::vector<double>>();
            ws.sample.label = jp.at("y").get<double>();
            ws.sample.group = g.group;
            if (jp.contains("anchor")) ws.sample.anchor = jp.at("anchor").get<std::vector<double>>();
            ws.weight = jp.at("w").get<double>();
            g.points.push_back(std::move(ws));
        }
        groups.push_back(std::move(g));
    }
    return make_population(std::move(groups), std::move(fractions));
}

}  // namespace perfsim
