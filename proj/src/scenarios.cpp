#include "perfsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace perfsim {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic normal draws via Box-Muller on splitmix64 uniforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform() {
        state_ = splitmix64(state_);
        return (state_ >> 11) * 0x1.0p-53;
    }

    double normal(double mean, double sd) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sd * spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

GroupDistribution point_group(int id, std::vector<double> x, double y) {
    GroupDistribution g;
    g.group = id;
    Sample s;
    s.features = std::move(x);
    s.label = y;
    s.group = id;
    g.points.push_back({std::move(s), 1.0});
    return g;
}

GroupDistribution uniform_group(int id, std::vector<Sample> samples) {
    GroupDistribution g;
    g.group = id;
    const double w = 1.0 / samples.size();
    for (auto& s : samples) {
        s.group = id;
        g.points.push_back({std::move(s), w});
    }
    return g;
}

TransitionSpec parse_transition(const json& j, std::vector<std::string>& errors);

TransitionSpec parse_transition_inner(const json& j, std::vector<std::string>& errors) {
    TransitionSpec t;
    if (!j.contains("kind")) {
        errors.push_back("transition.kind missing");
        return t;
    }
    t.kind = transition_kind_from_name(j.at("kind").get<std::string>());
    t.rate = j.value("rate", 0.1);
    t.clamp_lo = j.value("clamp_lo", 0.0);
    t.clamp_hi = j.value("clamp_hi", 1.0);
    if (j.contains("p_min")) t.p_min = j.at("p_min").get<std::vector<double>>();
    t.epsilon = j.value("epsilon", 0.0);
    if (j.contains("feature_mask")) t.feature_mask = j.at("feature_mask").get<std::vector<int>>();
    if (j.contains("budgets")) t.budgets = j.at("budgets").get<std::vector<double>>();
    t.intercept = j.value("intercept", 0.5);
    t.slope = j.value("slope", 0.5);
    if (t.kind == TransitionKind::Composite) {
        if (!j.contains("children") || !j.at("children").is_array() || j.at("children").empty())
            errors.push_back("composite transition needs a nonempty children array");
        else
            for (const auto& c : j.at("children")) t.children.push_back(parse_transition(c, errors));
    }
    return t;
}

TransitionSpec parse_transition(const json& j, std::vector<std::string>& errors) {
    try {
        return parse_transition_inner(j, errors);
    } catch (const Error& e) {
        errors.push_back(e.what());
        return {};
    } catch (const json::exception& e) {
        errors.push_back(std::string("transition: ") + e.what());
        return {};
    }
}

}  // namespace

const char* population_source_name(PopulationSource s) {
    switch (s) {
        case PopulationSource::SyntheticGaussianMean: return "synthetic_gaussian_mean";
        case PopulationSource::SyntheticGaussianClassify: return "synthetic_gaussian_classify";
        case PopulationSource::TwoPointExample1: return "two_point_example1";
        case PopulationSource::StrategicExample2: return "strategic_example2";
        case PopulationSource::DROExample4: return "dro_example4";
        case PopulationSource::GLVExample3: return "glv_example3";
        case PopulationSource::GLVDivergence: return "glv_divergence";
        case PopulationSource::TabularCSV: return "tabular_csv";
        case PopulationSource::MultiGroupGaussian: return "multigroup_gaussian";
    }
    return "?";
}

PopulationSource population_source_from_name(const std::string& name) {
    if (name == "synthetic_gaussian_mean") return PopulationSource::SyntheticGaussianMean;
    if (name == "synthetic_gaussian_classify") return PopulationSource::SyntheticGaussianClassify;
    if (name == "two_point_example1") return PopulationSource::TwoPointExample1;
    if (name == "strategic_example2") return PopulationSource::StrategicExample2;
    if (name == "dro_example4") return PopulationSource::DROExample4;
    if (name == "glv_example3") return PopulationSource::GLVExample3;
    if (name == "glv_divergence") return PopulationSource::GLVDivergence;
    if (name == "tabular_csv") return PopulationSource::TabularCSV;
    if (name == "multigroup_gaussian") return PopulationSource::MultiGroupGaussian;
    fail(Errc::ValidationError, "unknown population source '" + name + "'");
}

EngineConfig ScenarioConfig::engine_config(std::uint64_t seed) const {
    EngineConfig cfg;
    cfg.scenario_name = name;
    cfg.pop0 = build_population(*this, seed);
    cfg.theta0 = Model{model_family, theta0};
    cfg.loss = loss;
    cfg.transition = transition;
    cfg.schema = schema;
    cfg.mechanism = {mechanism, rho, radius};
    cfg.optimizer = optimizer;
    cfg.tau = tau;
    cfg.max_rounds = max_rounds;
    cfg.seed = seed;
    return cfg;
}

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);  // allow comments
    } catch (const json::parse_error& e) {
        fail(Errc::ParseError, origin + ": " + e.what());
    }

    std::vector<std::string> errors;
    ScenarioConfig cfg;
    cfg.path = origin;
    try {
        cfg.name = j.value("name", std::filesystem::path(origin).stem().string());

        if (!j.contains("population")) {
            errors.push_back("population section missing");
        } else {
            const auto& p = j.at("population");
            if (!p.contains("source")) errors.push_back("population.source missing");
            else cfg.source = population_source_from_name(p.at("source").get<std::string>());
            if (p.contains("fractions")) cfg.fractions0 = p.at("fractions").get<std::vector<double>>();
            if (p.contains("targets")) cfg.targets = p.at("targets").get<std::vector<double>>();
            cfg.noise_sd = p.value("noise_sd", 0.05);
            cfg.samples = p.value("samples", 1000);
            cfg.csv_path = p.value("csv_path", std::string());
            if (p.contains("feature_cols"))
                cfg.feature_cols = p.at("feature_cols").get<std::vector<std::string>>();
            cfg.label_col = p.value("label_col", std::string());
            cfg.group_col = p.value("group_col", std::string());
            cfg.normalize = p.value("normalize", false);
        }

        if (!j.contains("model")) {
            errors.push_back("model section missing");
        } else {
            const auto& m = j.at("model");
            cfg.model_family = model_family_from_name(m.value("family", "scalar_mean"));
            if (m.contains("theta0")) cfg.theta0 = m.at("theta0").get<std::vector<double>>();
        }

        if (!j.contains("loss")) {
            errors.push_back("loss section missing");
        } else {
            const auto& l = j.at("loss");
            if (!l.contains("family")) errors.push_back("loss.family missing");
            else cfg.loss.family = loss_family_from_name(l.at("family").get<std::string>());
            if (l.contains("gamma")) cfg.loss.gamma = l.at("gamma").get<double>();
            if (l.contains("beta")) cfg.loss.beta = l.at("beta").get<double>();
            if (l.contains("loss_sup")) cfg.loss.loss_sup = l.at("loss_sup").get<double>();
        }

        if (!j.contains("transition")) errors.push_back("transition section missing");
        else cfg.transition = parse_transition(j.at("transition"), errors);

        if (j.contains("schema")) {
            const auto& s = j.at("schema");
            cfg.schema.kind = schema_kind_from_name(s.value("kind", "conventional"));
            cfg.schema.k = s.value("k", 1);
            cfg.schema.delta = s.value("delta", 0.0);
            cfg.schema.epsilon_assumed = s.value("epsilon_assumed", 0.0);
        }

        if (j.contains("optimizer")) {
            const auto& o = j.at("optimizer");
            cfg.optimizer.tol = o.value("tol", 1e-10);
            cfg.optimizer.max_iters = o.value("max_iters", 100000);
            if (o.contains("box")) {
                const auto box = o.at("box").get<std::vector<double>>();
                if (box.size() != 2) errors.push_back("optimizer.box must be [lo, hi]");
                else {
                    cfg.optimizer.box_lo = box[0];
                    cfg.optimizer.box_hi = box[1];
                }
            }
        }

        if (j.contains("mechanism")) {
            const auto& m = j.at("mechanism");
            cfg.mechanism = mechanism_from_name(m.value("kind", "plain"));
            cfg.rho = m.value("rho", 0.0);
            cfg.radius = m.value("radius", 0.0);
        }
        if (j.contains("rho_list")) cfg.rho_list = j.at("rho_list").get<std::vector<double>>();
        if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
        cfg.tau = j.value("tau", 1e-6);
        cfg.max_rounds = j.value("max_rounds", 200);
        if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (cfg.seeds.empty()) cfg.seeds = {1};
    } catch (const Error& e) {
        errors.push_back(e.what());
    } catch (const json::exception& e) {
        errors.push_back(e.what());
    }

    // Cross-field validation.
    if (cfg.rho < 0.0) errors.push_back("mechanism.rho must be nonnegative");
    for (double r : cfg.rho_list)
        if (r < 0.0) errors.push_back("rho_list entries must be nonnegative");
    if (cfg.tau <= 0.0) errors.push_back("tau must be positive");
    if (cfg.max_rounds < 1) errors.push_back("max_rounds must be >= 1");
    if (cfg.source == PopulationSource::TabularCSV) {
        if (cfg.csv_path.empty()) errors.push_back("population.csv_path missing for tabular source");
        else {
            std::filesystem::path csv(cfg.csv_path);
            if (csv.is_relative() && !origin.empty() && origin != "<inline>")
                csv = std::filesystem::path(origin).parent_path() / csv;
            if (!std::filesystem::exists(csv))
                errors.push_back("csv file not found: " + csv.string());
            else
                cfg.csv_path = csv.string();
        }
        if (cfg.feature_cols.empty()) errors.push_back("population.feature_cols missing");
        if (cfg.label_col.empty()) errors.push_back("population.label_col missing");
        if (cfg.group_col.empty()) errors.push_back("population.group_col missing");
    }
    if (cfg.theta0.empty()) errors.push_back("model.theta0 missing");

    if (!errors.empty()) {
        std::string msg = origin + ": ";
        for (std::size_t i = 0; i < errors.size(); ++i) {
            if (i) msg += "; ";
            msg += errors[i];
        }
        fail(Errc::ValidationError, msg);
    }
    return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::filesystem::path p(path);
    if (!std::filesystem::exists(p) && p.extension().empty()) p += ".json";
    std::ifstream in(p);
    if (!in) fail(Errc::ParseError, "cannot open scenario config " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), p.string());
}

void apply_override(ScenarioConfig& cfg, const std::string& key, const std::string& value) {
    auto as_double = [&](const std::string& v) {
        try {
            std::size_t pos = 0;
            const double d = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            fail(Errc::ValidationError, "override " + key + ": '" + v + "' is not a number");
        }
    };
    if (key == "mechanism") cfg.mechanism = mechanism_from_name(value);
    else if (key == "rho") cfg.rho = as_double(value);
    else if (key == "radius") cfg.radius = as_double(value);
    else if (key == "schema") cfg.schema.kind = schema_kind_from_name(value);
    else if (key == "k") cfg.schema.k = static_cast<int>(as_double(value));
    else if (key == "tau") cfg.tau = as_double(value);
    else if (key == "max_rounds") cfg.max_rounds = static_cast<int>(as_double(value));
    else if (key == "samples") cfg.samples = static_cast<int>(as_double(value));
    else if (key == "epsilon") cfg.epsilon = as_double(value);
    else if (key == "csv_path") cfg.csv_path = value;
    else if (key == "seeds") {
        cfg.seeds.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, ':'))
            if (!tok.empty()) cfg.seeds.push_back(std::stoull(tok));
        if (cfg.seeds.empty()) fail(Errc::ValidationError, "seeds override is empty");
    } else {
        fail(Errc::ValidationError, "unknown override key '" + key + "'");
    }
    cfg.overrides.emplace_back(key, value);
}

namespace {

PopulationState build_gaussian_mean(const ScenarioConfig& cfg, std::uint64_t seed) {
    if (cfg.fractions0.size() != cfg.targets.size() || cfg.fractions0.empty())
        fail(Errc::ValidationError, "gaussian mean source needs matching fractions and targets");
    Rng rng(splitmix64(seed ^ 0xA5A5A5A5ull));
    std::vector<GroupDistribution> groups;
    for (std::size_t g = 0; g < cfg.targets.size(); ++g) {
        const int n = std::max(1, static_cast<int>(std::lround(cfg.samples * cfg.fractions0[g])));
        std::vector<Sample> samples(n);
        for (auto& s : samples) {
            const double y = rng.normal(cfg.targets[g], cfg.noise_sd);
            s.features = {y};
            s.label = y;
        }
        groups.push_back(uniform_group(static_cast<int>(g), std::move(samples)));
    }
    return make_population(std::move(groups), cfg.fractions0);
}

PopulationState build_gaussian_classify(const ScenarioConfig& cfg, std::uint64_t seed) {
    Rng rng(splitmix64(seed ^ 0xC1A551F1ull));
    std::vector<double> fractions = cfg.fractions0.empty() ? std::vector<double>{0.3, 0.7}
                                                           : cfg.fractions0;
    if (fractions.size() != 2)
        fail(Errc::ValidationError, "gaussian classify source is two-group");
    std::vector<GroupDistribution> groups;
    for (int g = 0; g < 2; ++g) {
        const int n = std::max(1, static_cast<int>(std::lround(cfg.samples * fractions[g])));
        std::vector<Sample> samples(n);
        for (auto& s : samples) {
            const double x1 = rng.uniform(), x2 = rng.uniform();
            s.features = {x1, x2};
            s.label = g == 0 ? (x1 - 0.5 * x2 >= 0.5 ? 1.0 : 0.0)
                             : (0.5 * x1 + 0.5 * x2 >= 0.5 ? 1.0 : 0.0);
        }
        groups.push_back(uniform_group(g, std::move(samples)));
    }
    return make_population(std::move(groups), fractions);
}

PopulationState build_two_point_example1(const ScenarioConfig& cfg) {
    std::vector<double> fractions = cfg.fractions0.empty() ? std::vector<double>{0.7, 0.3}
                                                           : cfg.fractions0;
    std::vector<GroupDistribution> groups;
    groups.push_back(point_group(0, {1.0}, 1.0));
    groups.push_back(point_group(1, {0.0}, 0.0));
    return make_population(std::move(groups), fractions);
}

PopulationState build_strategic_example2(const ScenarioConfig& cfg) {
    std::vector<double> fractions = cfg.fractions0.empty() ? std::vector<double>{0.7, 0.3}
                                                           : cfg.fractions0;
    const int n = cfg.samples;
    std::vector<GroupDistribution> groups;
    for (int g = 0; g < 2; ++g) {
        std::vector<Sample> samples(n);
        for (int i = 0; i < n; ++i) {
            const double x = (i + 0.5) / n;
            samples[i].features = {x};
            samples[i].anchor = {x};
            samples[i].label = x >= 0.5 ? 1.0 : 0.0;
        }
        groups.push_back(uniform_group(g, std::move(samples)));
    }
    return make_population(std::move(groups), fractions);
}

PopulationState build_dro_example4(const ScenarioConfig& cfg) {
    std::vector<double> fractions = cfg.fractions0.empty() ? std::vector<double>{0.4, 0.6}
                                                           : cfg.fractions0;
    std::vector<GroupDistribution> groups;
    groups.push_back(point_group(0, {1.0}, 1.0));
    groups.push_back(point_group(1, {-1.0}, -1.0));
    return make_population(std::move(groups), fractions);
}

PopulationState build_glv_example3(const ScenarioConfig& cfg) {
    std::vector<double> fractions = cfg.fractions0.empty() ? std::vector<double>{0.5, 0.5}
                                                           : cfg.fractions0;
    std::vector<GroupDistribution> groups;
    groups.push_back(point_group(0, {1.0}, -1.0));
    groups.push_back(point_group(1, {2.0}, 1.0));
    return make_population(std::move(groups), fractions);
}

// Linear-model Gaussian data with asymmetric feature magnitudes: group 0 has
// x = 1 and balanced label clusters at delta +- 2, group 1 has x = 3 with
// labels near -delta/3. The loss-difference between groups is then quadratic
// in theta, which is what gives the group-loss-variance penalty its double
// well.
PopulationState build_glv_divergence(const ScenarioConfig& cfg, std::uint64_t seed) {
    const double delta = 0.05;
    Rng rng(splitmix64(seed ^ 0xD1BE26E4ull));
    std::vector<double> fractions = cfg.fractions0.empty() ? std::vector<double>{0.5, 0.5}
                                                           : cfg.fractions0;
    const int half = std::max(1, cfg.samples / 2);

    std::vector<Sample> ga(2 * half);
    for (int i = 0; i < half; ++i) {
        ga[2 * i].features = {1.0};
        ga[2 * i].label = delta + 2.0 + rng.normal(0.0, cfg.noise_sd);
        ga[2 * i + 1].features = {1.0};
        ga[2 * i + 1].label = delta - 2.0 + rng.normal(0.0, cfg.noise_sd);
    }
    std::vector<Sample> gb(2 * half);
    for (auto& s : gb) {
        s.features = {3.0};
        s.label = -delta / 3.0 + rng.normal(0.0, cfg.noise_sd);
    }
    std::vector<GroupDistribution> groups;
    groups.push_back(uniform_group(0, std::move(ga)));
    groups.push_back(uniform_group(1, std::move(gb)));
    return make_population(std::move(groups), fractions);
}

PopulationState build_multigroup_gaussian(const ScenarioConfig& cfg, std::uint64_t seed) {
    ScenarioConfig c = cfg;
    if (c.fractions0.empty()) c.fractions0 = {0.15, 0.25, 0.6};
    if (c.targets.empty()) c.targets = {0.3, 0.5, 0.7};
    return build_gaussian_mean(c, seed);
}

}  // namespace

PopulationState build_population(const ScenarioConfig& cfg, std::uint64_t seed) {
    switch (cfg.source) {
        case PopulationSource::SyntheticGaussianMean: return build_gaussian_mean(cfg, seed);
        case PopulationSource::SyntheticGaussianClassify: return build_gaussian_classify(cfg, seed);
        case PopulationSource::TwoPointExample1: return build_two_point_example1(cfg);
        case PopulationSource::StrategicExample2: return build_strategic_example2(cfg);
        case PopulationSource::DROExample4: return build_dro_example4(cfg);
        case PopulationSource::GLVExample3: return build_glv_example3(cfg);
        case PopulationSource::GLVDivergence: return build_glv_divergence(cfg, seed);
        case PopulationSource::MultiGroupGaussian: return build_multigroup_gaussian(cfg, seed);
        case PopulationSource::TabularCSV: {
            return ingest_tabular(cfg.csv_path, cfg.feature_cols, cfg.label_col, cfg.group_col,
                                  cfg.normalize)
                .pop;
        }
    }
    fail(Errc::ValidationError, "unhandled population source");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& s : out) {
        const auto b = s.find_first_not_of(" \t");
        const auto e = s.find_last_not_of(" \t");
        s = b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& col, int line_no) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        fail(Errc::NonNumericFeature, "column '" + col + "' line " + std::to_string(line_no) +
                                          ": '" + s + "' is not numeric");
    }
}

}  // namespace

IngestResult ingest_tabular(const std::string& path, const std::vector<std::string>& feature_cols,
                            const std::string& label_col, const std::string& group_col,
                            bool normalize) {
    std::ifstream in(path);
    if (!in) fail(Errc::FileNotFound, "cannot open " + path);

    std::string header;
    if (!std::getline(in, header)) fail(Errc::ParseError, path + ": empty file");
    const auto cols = split_csv_line(header);
    auto col_index = [&](const std::string& name) {
        const auto it = std::find(cols.begin(), cols.end(), name);
        if (it == cols.end()) fail(Errc::BadColumn, "column '" + name + "' not in header of " + path);
        return static_cast<std::size_t>(it - cols.begin());
    };
    std::vector<std::size_t> fidx;
    for (const auto& f : feature_cols) fidx.push_back(col_index(f));
    const std::size_t lidx = col_index(label_col);
    const std::size_t gidx = col_index(group_col);

    std::map<std::string, int> group_ids;
    std::vector<std::string> group_names;
    std::vector<std::vector<Sample>> by_group;

    std::string line;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != cols.size())
            fail(Errc::ParseError, path + " line " + std::to_string(line_no) + ": expected " +
                                       std::to_string(cols.size()) + " fields, got " +
                                       std::to_string(fields.size()));
        Sample s;
        for (std::size_t k = 0; k < fidx.size(); ++k)
            s.features.push_back(parse_number(fields[fidx[k]], feature_cols[k], line_no));
        s.label = parse_number(fields[lidx], label_col, line_no);
        const std::string& gname = fields[gidx];
        auto [it, inserted] = group_ids.try_emplace(gname, static_cast<int>(group_names.size()));
        if (inserted) {
            group_names.push_back(gname);
            by_group.emplace_back();
        }
        s.group = it->second;
        by_group[it->second].push_back(std::move(s));
    }
    if (group_names.size() < 2)
        fail(Errc::SingleGroup, path + ": group column has fewer than 2 distinct values");

    std::size_t total = 0;
    for (const auto& v : by_group) total += v.size();

    IngestResult res;
    res.group_names = group_names;
    const std::size_t d = feature_cols.size();
    res.feature_means.assign(d, 0.0);
    res.feature_sds.assign(d, 0.0);
    for (const auto& v : by_group)
        for (const auto& s : v)
            for (std::size_t k = 0; k < d; ++k) res.feature_means[k] += s.features[k];
    for (auto& m : res.feature_means) m /= total;
    for (const auto& v : by_group)
        for (const auto& s : v)
            for (std::size_t k = 0; k < d; ++k) {
                const double dev = s.features[k] - res.feature_means[k];
                res.feature_sds[k] += dev * dev;
            }
    for (auto& sd : res.feature_sds) sd = std::sqrt(sd / total);

    std::vector<GroupDistribution> groups;
    std::vector<double> fractions;
    for (std::size_t g = 0; g < by_group.size(); ++g) {
        auto samples = std::move(by_group[g]);
        if (normalize) {
            for (auto& s : samples)
                for (std::size_t k = 0; k < d; ++k) {
                    const double sd = res.feature_sds[k] > 0 ? res.feature_sds[k] : 1.0;
                    s.features[k] = (s.features[k] - res.feature_means[k]) / sd;
                }
        }
        for (auto& s : samples) s.anchor = s.features;
        fractions.push_back(static_cast<double>(samples.size()) / total);
        groups.push_back(uniform_group(static_cast<int>(g), std::move(samples)));
    }
    res.pop = make_population(std::move(groups), std::move(fractions));
    return res;
}

}  // namespace perfsim
