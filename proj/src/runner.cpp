#include "perfsim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

namespace perfsim {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::FileNotFound, "cannot write " + path);
    out << content;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Bounded-concurrency map over index range [0, n).
void parallel_for(int n, int parallel, const std::function<void(int)>& body) {
    if (parallel <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> workers;
    std::mutex mu;
    int next = 0;
    const int k = std::min(parallel, n);
    for (int w = 0; w < k; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= n) return;
                    i = next++;
                }
                body(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

std::string certificate_line(const ScenarioConfig& cfg) {
    if (cfg.mechanism == MechanismKind::GLV || cfg.mechanism == MechanismKind::DROChi2)
        return "certificate: none (" + std::string(mechanism_name(cfg.mechanism)) + ")";
    if (!cfg.loss.gamma || !cfg.loss.beta || !cfg.loss.loss_sup || !cfg.epsilon)
        return "certificate: unavailable (gamma/beta/loss_sup/epsilon not configured) [uncertified]";
    const SchemaCondition cond = cfg.schema.kind == SchemaKind::KDelayed
                                     ? SchemaCondition::KDelayedStrict
                                     : SchemaCondition::Plain;
    const StabilityCertificate cert =
        certificate(cfg.loss, cfg.mechanism, cfg.rho, *cfg.epsilon, false, cond);
    std::ostringstream out;
    out << "certificate: eps=" << fmt_short(cert.epsilon) << " tilde_beta=" << fmt_short(cert.tilde_beta)
        << " lhs=" << fmt_short(cert.lhs) << " threshold=" << fmt_short(cert.threshold())
        << (cert.holds ? " [certified]" : " [uncertified]");
    return out.str();
}

Trajectory drive(const EngineConfig& ecfg) {
    if (ecfg.mechanism.kind == MechanismKind::DROChi2) return repeated_dro(ecfg);
    return fair_rrm(ecfg);
}

}  // namespace

std::string config_hash(const ScenarioConfig& cfg) {
    std::string text;
    if (!cfg.path.empty() && cfg.path != "<inline>") {
        std::ifstream in(cfg.path, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    } else {
        text = cfg.name;
    }
    for (const auto& [k, v] : cfg.overrides) text += "\n--set " + k + "=" + v;
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seeds"] = seeds;
    if (!overrides.empty()) {
        nlohmann::json jo = nlohmann::json::object();
        for (const auto& [k, v] : overrides) jo[k] = v;
        j["overrides"] = std::move(jo);
    }
    j["outputs"] = output_files;
    j["wall_times_sec"] = wall_times_sec;
    j["runs"] = run_summaries;
    j["ok"] = ok;
    return j.dump(2);
}

RunManifest cmd_run(const ScenarioConfig& cfg, const std::string& out_dir, int parallel) {
    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.command = "run " + cfg.name;
    manifest.config_hash = config_hash(cfg);
    manifest.seeds = cfg.seeds;
    manifest.overrides = cfg.overrides;

    const std::string cert = certificate_line(cfg);
    const int n = static_cast<int>(cfg.seeds.size());
    std::vector<std::string> files(n), summaries(n);
    std::vector<double> times(n);
    std::vector<std::string> errors(n);

    parallel_for(n, parallel, [&](int i) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed = cfg.seeds[i];
        try {
            EngineConfig ecfg = cfg.engine_config(seed);
            Trajectory traj = drive(ecfg);
            traj.overrides = cfg.overrides;
            std::ostringstream base;
            base << cfg.name << "_" << mechanism_name(cfg.mechanism) << "_rho"
                 << fmt_short(cfg.mechanism == MechanismKind::DROChi2 ? cfg.radius : cfg.rho)
                 << "_seed" << seed;
            const std::string csv_path = (fs::path(out_dir) / (base.str() + ".csv")).string();
            const std::string json_path = (fs::path(out_dir) / (base.str() + ".json")).string();
            write_file(csv_path, trajectory_to_csv(traj));
            write_file(json_path, trajectory_to_json(traj));
            files[i] = csv_path + ";" + json_path;
            std::ostringstream sum;
            sum << "seed " << seed << ": " << traj.verdict.to_string()
                << (traj.loss_sup_ok ? "" : " [loss_sup exceeded]") << " | " << cert;
            summaries[i] = sum.str();
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
        times[i] = seconds_since(start);
    });

    for (int i = 0; i < n; ++i) {
        if (!errors[i].empty()) {
            manifest.ok = false;
            manifest.run_summaries.push_back("seed " + std::to_string(cfg.seeds[i]) +
                                             ": error: " + errors[i]);
            continue;
        }
        std::stringstream ss(files[i]);
        std::string f;
        while (std::getline(ss, f, ';')) manifest.output_files.push_back(f);
        manifest.run_summaries.push_back(summaries[i]);
        manifest.wall_times_sec.push_back(times[i]);
    }
    write_file((fs::path(out_dir) / "manifest.json").string(), manifest.to_json());
    return manifest;
}

RunManifest cmd_sweep(const ScenarioConfig& cfg, const std::vector<double>& rho_list,
                      const std::string& out_dir, int parallel) {
    if (cfg.mechanism == MechanismKind::DROChi2)
        fail(Errc::ValidationError,
             "sweep drives the convergent mechanisms; use the counterexamples command for the "
             "chi^2-DRO baseline");
    for (double r : rho_list)
        if (r < 0.0) fail(Errc::ValidationError, "rho must be nonnegative");

    fs::create_directories(out_dir);
    RunManifest manifest;
    manifest.command = "sweep " + cfg.name;
    manifest.config_hash = config_hash(cfg);
    manifest.seeds = cfg.seeds;
    manifest.overrides = cfg.overrides;

    const std::vector<MechanismKind> mechanisms = {MechanismKind::GLP, MechanismKind::SLP,
                                                   MechanismKind::RW};
    struct Cell {
        MechanismKind mech;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (auto m : mechanisms)
        for (auto s : cfg.seeds) cells.push_back({m, s});

    std::vector<MonotonicityReport> reports(cells.size());
    std::vector<std::map<double, Trajectory>> trajectories(cells.size());
    std::vector<std::string> errors(cells.size());

    parallel_for(static_cast<int>(cells.size()), parallel, [&](int i) {
        const auto& cell = cells[i];
        try {
            EngineConfig base = cfg.engine_config(cell.seed);
            reports[i] = monotonicity_report(base, cell.mech, rho_list, cfg.tau);
            for (double rho : rho_list) {
                EngineConfig ecfg = base;
                ecfg.mechanism = {cell.mech, rho, 0.0};
                trajectories[i][rho] = fair_rrm(ecfg);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    // Per-run trajectory files.
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!errors[i].empty()) {
            manifest.ok = false;
            manifest.run_summaries.push_back(std::string(mechanism_name(cells[i].mech)) + " seed " +
                                             std::to_string(cells[i].seed) + ": error: " + errors[i]);
            continue;
        }
        for (const auto& [rho, traj] : trajectories[i]) {
            std::ostringstream base;
            base << cfg.name << "_" << mechanism_name(cells[i].mech) << "_rho" << fmt_short(rho)
                 << "_seed" << cells[i].seed << ".csv";
            const std::string path = (fs::path(out_dir) / base.str()).string();
            write_file(path, trajectory_to_csv(traj));
            manifest.output_files.push_back(path);
        }
    }

    // Summary: seed means of the terminal disparities per (mechanism, rho).
    std::ostringstream summary;
    summary << "# perfsim-sweep-summary-v1\n";
    summary << "mechanism,rho,loss_disparity_mean,participation_disparity_mean,minority_fraction_"
               "mean,converged_runs,total_runs,monotone_flags\n";
    for (auto m : mechanisms) {
        for (double rho : rho_list) {
            double ld = 0, pd = 0, mf = 0;
            int converged = 0, total = 0, flags = 0;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].mech != m || !errors[i].empty()) continue;
                const auto it = trajectories[i].find(rho);
                if (it == trajectories[i].end()) continue;
                const auto& last = it->second.back();
                ld += last.loss_disparity;
                pd += last.participation_disparity;
                mf += *std::min_element(last.fractions.begin(), last.fractions.end());
                if (it->second.verdict.kind == Verdict::Kind::Converged) ++converged;
                ++total;
                for (const auto& row : reports[i].rows)
                    if (row.rho == rho && row.flagged) ++flags;
            }
            if (total == 0) continue;
            summary << mechanism_name(m) << "," << fmt_short(rho) << "," << fmt(ld / total) << ","
                    << fmt(pd / total) << "," << fmt(mf / total) << "," << converged << "," << total
                    << "," << flags << "\n";
        }
    }
    const std::string summary_path = (fs::path(out_dir) / (cfg.name + "_sweep_summary.csv")).string();
    write_file(summary_path, summary.str());
    manifest.output_files.push_back(summary_path);

    // Per-round mean +- standard error series for plotting.
    std::ostringstream series;
    series << "# perfsim-sweep-series-v1\n";
    series << "mechanism,rho,t,loss_disparity_mean,loss_disparity_se,minority_fraction_mean,"
              "minority_fraction_se\n";
    for (auto m : mechanisms) {
        for (double rho : rho_list) {
            std::vector<const Trajectory*> runs;
            for (std::size_t i = 0; i < cells.size(); ++i)
                if (cells[i].mech == m && errors[i].empty() && trajectories[i].count(rho))
                    runs.push_back(&trajectories[i].at(rho));
            if (runs.empty()) continue;
            std::size_t rounds = 0;
            for (const auto* r : runs) rounds = std::max(rounds, r->points.size());
            for (std::size_t t = 0; t < rounds; ++t) {
                std::vector<double> lds, mfs;
                for (const auto* r : runs) {
                    // Converged runs hold their terminal value afterwards.
                    const auto& p = r->points[std::min(t, r->points.size() - 1)];
                    lds.push_back(p.loss_disparity);
                    mfs.push_back(*std::min_element(p.fractions.begin(), p.fractions.end()));
                }
                auto mean_se = [](const std::vector<double>& v) {
                    double m2 = 0;
                    for (double x : v) m2 += x;
                    m2 /= v.size();
                    double sd = 0;
                    for (double x : v) sd += (x - m2) * (x - m2);
                    sd = v.size() > 1 ? std::sqrt(sd / (v.size() - 1)) : 0.0;
                    return std::make_pair(m2, sd / std::sqrt(static_cast<double>(v.size())));
                };
                const auto [ldm, ldse] = mean_se(lds);
                const auto [mfm, mfse] = mean_se(mfs);
                series << mechanism_name(m) << "," << fmt_short(rho) << "," << t << "," << fmt(ldm)
                       << "," << fmt(ldse) << "," << fmt(mfm) << "," << fmt(mfse) << "\n";
            }
        }
    }
    const std::string series_path = (fs::path(out_dir) / (cfg.name + "_sweep_series.csv")).string();
    write_file(series_path, series.str());
    manifest.output_files.push_back(series_path);

    write_file((fs::path(out_dir) / "manifest.json").string(), manifest.to_json());
    return manifest;
}

bool CounterexampleReport::all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const CounterexampleRow& r) { return r.pass; });
}

std::string CounterexampleReport::to_csv() const {
    std::ostringstream out;
    out << "name,result,details\n";
    for (const auto& r : rows)
        out << r.name << "," << (r.pass ? "PASS" : "FAIL") << "," << r.details << "\n";
    return out.str();
}

CounterexampleReport run_counterexamples(const std::string& scenario_dir) {
    CounterexampleReport report;

    // 1. GLV nonconvexity probe on the two-point regression data: second
    //    differences over theta in [0.5, 1.5], step 0.01, rho = 0.6.
    {
        CounterexampleRow row{"glv_nonconvexity", false, ""};
        try {
            ScenarioConfig cfg = load_scenario((fs::path(scenario_dir) / "glv_example3").string());
            const PopulationState pop = build_population(cfg, cfg.seeds.front());
            const double rho = 0.6, h = 0.01;
            auto f = [&](double th) {
                return glv_objective(Model{ModelFamily::Linear, {th}}, pop, cfg.loss, rho);
            };
            double min_dd = 1e300, arg = 0;
            for (double th = 0.5; th <= 1.5 + 1e-12; th += h) {
                const double dd = (f(th + h) - 2 * f(th) + f(th - h)) / (h * h);
                if (dd < min_dd) {
                    min_dd = dd;
                    arg = th;
                }
            }
            const double at_one = (f(1 + h) - 2 * f(1) + f(1 - h)) / (h * h);
            row.pass = min_dd < 0.0 && std::abs(arg - 1.0) <= 0.2;
            std::ostringstream d;
            d << "min second difference " << fmt_short(min_dd) << " at theta=" << fmt_short(arg)
              << "; value at theta=1: " << fmt_short(at_one);
            row.details = d.str();
        } catch (const std::exception& e) {
            row.details = e.what();
        }
        report.rows.push_back(std::move(row));
    }

    // 2. GLV divergence run: rho = 0.5 must not converge within max_rounds.
    {
        CounterexampleRow row{"glv_divergence", false, ""};
        try {
            ScenarioConfig cfg = load_scenario((fs::path(scenario_dir) / "glv_divergence").string());
            cfg.mechanism = MechanismKind::GLV;
            cfg.rho = 0.5;
            Trajectory traj = fair_rrm(cfg.engine_config(cfg.seeds.front()));
            row.pass = traj.verdict.kind != Verdict::Kind::Converged;
            row.details = "verdict " + traj.verdict.to_string() + " after " +
                          std::to_string(traj.points.size() - 1) + " rounds";
        } catch (const std::exception& e) {
            row.details = e.what();
        }
        report.rows.push_back(std::move(row));
    }

    // 3. chi^2-DRO oscillation, period 2 with amplitude 0.2.
    {
        CounterexampleRow row{"dro_oscillation", false, ""};
        try {
            ScenarioConfig cfg = load_scenario((fs::path(scenario_dir) / "dro_example4").string());
            Trajectory traj = repeated_dro(cfg.engine_config(cfg.seeds.front()));
            bool amplitude_ok = true;
            for (std::size_t t = 1; t < traj.points.size(); ++t)
                if (std::abs(std::abs(traj.points[t].theta[0]) - 0.2) > 1e-9) amplitude_ok = false;
            row.pass = traj.verdict.kind == Verdict::Kind::Oscillating &&
                       traj.verdict.period == 2 && amplitude_ok;
            row.details = "verdict " + traj.verdict.to_string() +
                          (amplitude_ok ? ", |theta| = 0.2 +- 1e-9" : ", amplitude off");
        } catch (const std::exception& e) {
            row.details = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

RunManifest cmd_counterexamples(const std::string& scenario_dir, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const CounterexampleReport report = run_counterexamples(scenario_dir);
    RunManifest manifest;
    manifest.command = "counterexamples";
    manifest.config_hash = "-";
    manifest.ok = report.all_pass();
    for (const auto& r : report.rows)
        manifest.run_summaries.push_back(r.name + ": " + (r.pass ? "PASS" : "FAIL") + " (" +
                                         r.details + ")");
    const std::string path = (fs::path(out_dir) / "counterexamples.csv").string();
    write_file(path, report.to_csv());
    manifest.output_files.push_back(path);
    write_file((fs::path(out_dir) / "manifest.json").string(), manifest.to_json());
    return manifest;
}

std::string resolve_scenario_path(const std::string& arg) {
    fs::path p(arg);
    if (fs::exists(p)) return p.string();
    if (p.extension().empty() && fs::exists(fs::path(arg + ".json"))) return arg + ".json";
    const char* dir = std::getenv("PERFSIM_SCENARIO_DIR");
    if (dir != nullptr) {
        fs::path alt = fs::path(dir) / p;
        if (fs::exists(alt)) return alt.string();
        if (alt.extension().empty() && fs::exists(fs::path(alt.string() + ".json")))
            return alt.string() + ".json";
    }
    return arg;  // load_scenario reports the failure
}

}  // namespace perfsim
