// msmac command-line front end: config-driven assignment, simulation,
// figure replication, dataset generation, training, and parameter selection.
//
// Exit codes: 0 success, 1 runtime failure, 2 config/validation error,
// 3 scheduling infeasible.

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "msmac/config.hpp"
#include "msmac/datastore.hpp"
#include "msmac/oracle.hpp"
#include "msmac/replicate.hpp"

namespace fs = std::filesystem;
using namespace msmac;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "runs";
    std::uint64_t seed = 0;  // 0 = take the config's seed
    int workers = static_cast<int>(std::thread::hardware_concurrency());
};

fs::path make_run_dir(const GlobalOpts& g, const std::string& tag) {
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto stamp = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    fs::path dir = fs::path(g.out_dir) / (tag + "-" + std::to_string(stamp));
    fs::create_directories(dir);
    return dir;
}

Config load_config(GlobalOpts& g) {
    if (g.config_path.empty()) throw ConfigError("--config is required for this subcommand");
    return parse_config(g.config_path, g.seed);
}

Scenario to_scenario(const Config& c) {
    return Scenario{c.devices, c.params, c.qos, c.guards};
}

void check_scenario(const Config& c) {
    if (!c.has_params) throw ConfigError("missing config key: params");
    auto v = validate_scenario(c.devices, c.params, c.qos);
    for (const auto& w : v.warnings) std::cerr << "warning: " << w << "\n";
    if (!v.ok()) {
        for (const auto& err : v.violations) std::cerr << "error: " << err << "\n";
        throw ConfigError("scenario validation failed");
    }
}

RunManifest manifest_for(const Config& c, const std::string& command, double wall) {
    RunManifest m;
    m.scenario_hash = scenario_hash(to_scenario(c));
    m.seed = c.seed;
    m.command = command;
    m.wall_clock_s = wall;
    m.options = json{{"buffer", c.sim.buffer},
                     {"synccs", c.sim.synccs},
                     {"smsa", c.sim.smsa},
                     {"duration", c.sim.duration},
                     {"guards", {c.guards.g.hp, c.guards.g.rp, c.guards.g.lp}}};
    return m;
}

int cmd_assign(GlobalOpts& g) {
    Config c = load_config(g);
    check_scenario(c);
    const auto t0 = std::chrono::steady_clock::now();
    auto out = overall_assign(c.devices, c.params, c.qos, c.guards, c.sim.synccs);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto dir = make_run_dir(g, "assign");
    save_manifest(dir, manifest_for(c, "assign", wall));
    save_scenario(dir / "scenario.json", to_scenario(c));
    save_assignment(dir, to_scenario(c), out.assignment, out.est_delay, out.est_collision);
    {
        std::ofstream est(dir / "estimates.csv");
        est << "device_id,class,slot,mini_slot,est_delay_s,est_collision\n";
        for (size_t i = 0; i < c.devices.size(); ++i)
            est << c.devices[i].id << ',' << to_string(c.devices[i].cls) << ','
                << out.assignment.anchor[i].slot << ',' << out.assignment.anchor[i].mini << ','
                << out.est_delay[i] << ',' << out.est_collision[i] << "\n";
    }
    std::cout << "run: " << dir.string() << "\n"
              << "assigned " << out.assignment.assigned_count << "/" << c.devices.size()
              << " devices, F_s=" << (out.assignment.success ? 1 : 0) << "\n";
    return out.assignment.success ? 0 : kExitInfeasible;
}

int cmd_simulate(GlobalOpts& g, const std::string& assignment_dir) {
    Config c = load_config(g);
    check_scenario(c);
    Assignment a;
    AssignOutcome out;
    if (!assignment_dir.empty()) {
        a = load_assignment(assignment_dir);
    } else {
        out = overall_assign(c.devices, c.params, c.qos, c.guards, c.sim.synccs);
        if (!out.assignment.success) {
            std::cerr << "error: assignment infeasible (N_a=" << out.assignment.assigned_count
                      << ")\n";
            return kExitInfeasible;
        }
        a = out.assignment;
    }
    if (c.sim.duration <= 0 && c.sim.max_cycles <= 0)
        throw ConfigError("missing config key: sim.duration");

    const auto t0 = std::chrono::steady_clock::now();
    PerfReport rep = simulate(c.devices, c.params, a, c.sim);
    apply_qos(rep, c.qos);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto dir = make_run_dir(g, "simulate");
    save_manifest(dir, manifest_for(c, "simulate", wall));
    save_scenario(dir / "scenario.json", to_scenario(c));
    save_assignment(dir, to_scenario(c), a);
    save_report(dir, rep);
    std::cout << "run: " << dir.string() << "\n";
    for (PriorityClass cls : {PriorityClass::HP, PriorityClass::RP, PriorityClass::LP}) {
        const auto& agg = rep.cls.of(cls);
        if (agg.devices == 0) continue;
        std::printf("%s: %d devices, mean delay %.4g ms, mean collision %.4g%%, qos %s\n",
                    to_string(cls), agg.devices, agg.mean_delay * 1e3, agg.mean_collision * 100,
                    agg.qos_met ? "met" : "violated");
    }
    return 0;
}

int cmd_sweep(GlobalOpts& g, int runs) {
    Config base = load_config(g);
    check_scenario(base);
    auto dir = make_run_dir(g, "sweep");
    std::ofstream csv(dir / "sweep.csv");
    csv << "seed,F_s,hp_mean_delay_s,hp_mean_coll,rp_mean_delay_s,rp_mean_coll,"
           "lp_mean_delay_s,lp_mean_coll\n";
    std::mutex mu;
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= runs) return;
            // each run re-parses under its own seed so generated device sets vary
            const std::uint64_t seed = base.seed + static_cast<std::uint64_t>(k);
            Config c = parse_config(g.config_path, seed);
            auto out = overall_assign(c.devices, c.params, c.qos, c.guards);
            std::string row;
            if (!out.assignment.success) {
                row = std::to_string(seed) + ",0,,,,,,\n";
            } else {
                PerfReport rep = simulate(c.devices, c.params, out.assignment, c.sim);
                apply_qos(rep, c.qos);
                char buf[256];
                std::snprintf(buf, sizeof buf, "%llu,1,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                              static_cast<unsigned long long>(seed), rep.cls.hp.mean_delay,
                              rep.cls.hp.mean_collision, rep.cls.rp.mean_delay,
                              rep.cls.rp.mean_collision, rep.cls.lp.mean_delay,
                              rep.cls.lp.mean_collision);
                row = buf;
            }
            std::lock_guard<std::mutex> lock(mu);
            csv << row;
        }
    };
    std::vector<std::thread> pool;
    const int n_workers = std::max(1, std::min(g.workers, runs));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::cout << "run: " << dir.string() << "\n";
    return 0;
}

void write_minislot_csv(const fs::path& path, const std::vector<MiniSlotDelayRow>& rows) {
    std::ofstream csv(path);
    csv << "mini_slot,sim_delay_ms,analytic_delay_ms,spread";
    const size_t per = rows.empty() ? 0 : rows[0].device_delay_s.size();
    for (size_t j = 0; j < per; ++j) csv << ",device" << j + 1 << "_delay_ms";
    csv << "\n";
    for (const auto& r : rows) {
        csv << r.mini << ',' << r.sim_delay_s * 1e3 << ',' << r.analytic_delay_s * 1e3 << ','
            << r.spread;
        for (double d : r.device_delay_s) csv << ',' << d * 1e3;
        csv << "\n";
    }
}

int cmd_replicate(GlobalOpts& g, const std::string& fig) {
    auto dir = make_run_dir(g, "replicate-" + fig);
    const std::uint64_t seed = g.seed != 0 ? g.seed : 1;

    auto minislot = [&](MiniSlotExperiment ex) {
        ex.seed = seed;
        auto rows = run_minislot_experiment(ex);
        write_minislot_csv(dir / (fig + ".csv"), rows);
        std::cout << "run: " << dir.string() << "\n";
        return 0;
    };

    if (fig == "fig2a" || fig == "fig2b") {
        MiniSlotExperiment base;
        base.rate_lo = fig == "fig2a" ? 0.2 : 1.0;
        base.rate_hi = fig == "fig2a" ? 1.0 : 5.0;
        base.repeats = 16;
        base.seed = seed;
        // three curves: MsCS only without/with buffer, MsCS+SyncCS with buffer
        MiniSlotExperiment nobuf = base, sync = base;
        nobuf.buffer = false;
        sync.synccs = true;
        auto r_buf = run_minislot_experiment(base);
        auto r_nobuf = run_minislot_experiment(nobuf);
        auto r_sync = run_minislot_experiment(sync);
        std::ofstream csv(dir / (fig + ".csv"));
        csv << "mini_slot,mscs_nobuf_delay_ms,mscs_buf_delay_ms,mscs_synccs_buf_delay_ms,"
               "analytic_delay_ms\n";
        for (size_t m = 0; m < r_buf.size(); ++m)
            csv << m + 1 << ',' << r_nobuf[m].sim_delay_s * 1e3 << ','
                << r_buf[m].sim_delay_s * 1e3 << ',' << r_sync[m].sim_delay_s * 1e3 << ','
                << r_buf[m].analytic_delay_s * 1e3 << "\n";
        std::cout << "run: " << dir.string() << "\n";
        return 0;
    }
    if (fig == "fig3a" || fig == "fig3b") {
        MiniSlotExperiment ex;
        ex.devices_per_mini = 7;
        ex.buffer = fig == "fig3b";
        ex.repeats = 50;
        return minislot(ex);
    }
    if (fig == "fig4a") {
        MiniSlotExperiment ex;
        ex.devices_per_mini = 7;
        ex.t_m = 7e-6;
        ex.repeats = 50;
        return minislot(ex);
    }
    if (fig == "fig4b") {
        MiniSlotExperiment ex;
        ex.devices_per_mini = 7;
        ex.n_s = 5;
        ex.rate_lo = 1.0;
        ex.rate_hi = 5.0;
        ex.repeats = 50;
        return minislot(ex);
    }
    if (fig == "fig5a" || fig == "fig5b" || fig == "fig6") {
        ScenarioPreset preset = fig == "fig5a"   ? preset_fig5a()
                                : fig == "fig5b" ? preset_fig5b()
                                                 : preset_fig6();
        preset.seed = seed;
        auto run = run_scenario(preset);
        Scenario sc{run.devs, preset.params, preset.qos, preset.guards};
        save_scenario(dir / "scenario.json", sc);
        save_assignment(dir, sc, run.assign.assignment, run.assign.est_delay,
                        run.assign.est_collision);
        if (!run.assign.assignment.success) {
            std::cerr << "error: assignment infeasible for preset " << fig << "\n";
            return kExitInfeasible;
        }
        save_report(dir, run.report);
        std::cout << "run: " << dir.string() << "\n";
        for (PriorityClass cls : {PriorityClass::HP, PriorityClass::RP, PriorityClass::LP}) {
            const auto& agg = run.report.cls.of(cls);
            if (agg.devices == 0) continue;
            std::printf("%s: mean delay %.4g ms, mean collision %.4g%%\n", to_string(cls),
                        agg.mean_delay * 1e3, agg.mean_collision * 100);
        }
        return 0;
    }
    std::cerr << "error: unknown figure '" << fig
              << "' (expected fig2a|fig2b|fig3a|fig3b|fig4a|fig4b|fig5a|fig5b|fig6)\n";
    return kExitConfig;
}

int cmd_gen_dataset(GlobalOpts& g) {
    Config c = load_config(g);
    if (!c.sampler) throw ConfigError("missing config key: dataset");
    auto dir = make_run_dir(g, "dataset");
    const auto t0 = std::chrono::steady_clock::now();
    auto data = generate_dataset(*c.sampler, c.grid, c.sims_per_entry, c.seed,
                                 std::max(1, g.workers));
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_dataset(dir / "dataset.txt", data, c.sampler->intervals);
    RunManifest m;
    m.seed = c.seed;
    m.command = "gen-dataset";
    m.wall_clock_s = wall;
    m.options = json{{"profiles", c.sampler->profiles},
                     {"grid", c.grid.size()},
                     {"entries", data.size()},
                     {"sim_duration", c.sampler->sim_duration}};
    save_manifest(dir, m);
    std::cout << "run: " << dir.string() << "\n" << data.size() << " entries\n";
    return 0;
}

int cmd_train(GlobalOpts& g) {
    Config c = load_config(g);
    if (c.dataset_path.empty()) throw ConfigError("missing config key: dataset_path");
    auto data = load_dataset(c.dataset_path);
    if (data.empty()) throw ConfigError("dataset is empty");
    RegressorSpec spec = RegressorSpec::paper(static_cast<int>(data[0].features.size()));
    auto dir = make_run_dir(g, "train");
    const auto t0 = std::chrono::steady_clock::now();
    TrainedModel tm = train(spec, data, c.train);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    save_model(dir / "model.json", tm,
               json{{"dataset", c.dataset_path},
                    {"entries", data.size()},
                    {"epochs", c.train.epochs},
                    {"batch", c.train.batch},
                    {"seed", c.seed},
                    {"wall_clock_s", wall}});
    {
        std::ofstream hist(dir / "history.csv");
        hist << "epoch,train_loss,val_loss,val_r2\n";
        for (size_t e = 0; e < tm.history.size(); ++e)
            hist << e + 1 << ',' << tm.history[e].train_loss << ',' << tm.history[e].val_loss
                 << ',' << tm.history[e].val_r2 << "\n";
    }
    std::cout << "run: " << dir.string() << "\n";
    std::printf("test R2 (variance-ratio form): %.4f\n", tm.test_r2_printed);
    std::printf("test R2 (conventional):        %.4f\n", tm.test_r2_conventional);
    std::printf("indication bit accuracy:       %.2f%%\n", tm.test_bit_accuracy * 100);
    return 0;
}

int cmd_select(GlobalOpts& g) {
    Config c = load_config(g);
    if (c.model_path.empty()) throw ConfigError("missing config key: select.model");
    if (c.devices.empty()) throw ConfigError("missing config key: devices");
    TrainedModel tm = load_model(c.model_path);
    auto dir = make_run_dir(g, "select");
    try {
        auto ranked =
            select_params(c.devices, c.candidates, tm, c.qos, c.intervals, c.rate_min, c.rate_max);
        std::ofstream csv(dir / "ranked.csv");
        csv << "rank,n_m,r_h,r_r,r_l,margin,pred_bit\n";
        for (size_t i = 0; i < ranked.size(); ++i)
            csv << i + 1 << ',' << ranked[i].params.n_m << ',' << ranked[i].params.r_h << ','
                << ranked[i].params.r_r << ',' << ranked[i].params.r_l << ',' << ranked[i].margin
                << ',' << ranked[i].predicted[kIndicationBit] << "\n";
        std::cout << "run: " << dir.string() << "\n"
                  << ranked.size() << " feasible candidates; best: n_m=" << ranked[0].params.n_m
                  << " r=(" << ranked[0].params.r_h << "," << ranked[0].params.r_r << ","
                  << ranked[0].params.r_l << ")\n";
        return 0;
    } catch (const NoFeasibleCandidate& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
}

int cmd_report(const std::string& run_dir) {
    PerfReport rep = load_report(run_dir);
    std::printf("%-6s %8s %14s %14s %14s %14s\n", "class", "devices", "mean_delay_ms",
                "max_delay_ms", "mean_coll_%", "max_coll_%");
    for (PriorityClass cls : {PriorityClass::HP, PriorityClass::RP, PriorityClass::LP}) {
        const auto& a = rep.cls.of(cls);
        if (a.devices == 0) continue;
        std::printf("%-6s %8d %14.4f %14.4f %14.4f %14.4f\n", to_string(cls), a.devices,
                    a.mean_delay * 1e3, a.max_delay * 1e3, a.mean_collision * 100,
                    a.max_collision * 100);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mini-slot MAC scheduling toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "run configuration file (JSON)");
    app.add_option("--seed", g.seed, "override the config seed");
    app.add_option("--out", g.out_dir, "output directory for runs");
    app.add_option("--workers", g.workers, "worker pool size for sweeps/datasets");

    auto* assign = app.add_subcommand("assign", "device assignment from a config");
    auto* simulate = app.add_subcommand("simulate", "assignment + simulation from a config");
    std::string assignment_dir;
    simulate->add_option("--assignment", assignment_dir, "reuse a saved assignment run dir");
    auto* sweep = app.add_subcommand("sweep", "repeat a scenario across seeds");
    int sweep_runs = 8;
    sweep->add_option("--runs", sweep_runs, "number of seeds to sweep");
    auto* replicate = app.add_subcommand("replicate", "rebuild a figure's data table");
    std::string fig;
    replicate->add_option("figure", fig, "fig2a|fig2b|fig3a|fig3b|fig4a|fig4b|fig5a|fig5b|fig6")
        ->required();
    auto* gen = app.add_subcommand("gen-dataset", "generate a labeled dataset");
    auto* train_cmd = app.add_subcommand("train", "train the performance regressor");
    auto* select = app.add_subcommand("select", "rank protocol parameter candidates");
    auto* report = app.add_subcommand("report", "print a saved report summary");
    std::string report_dir;
    report->add_option("run", report_dir, "run directory containing report.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*assign) return cmd_assign(g);
        if (*simulate) return cmd_simulate(g, assignment_dir);
        if (*sweep) return cmd_sweep(g, sweep_runs);
        if (*replicate) return cmd_replicate(g, fig);
        if (*gen) return cmd_gen_dataset(g);
        if (*train_cmd) return cmd_train(g);
        if (*select) return cmd_select(g);
        if (*report) return cmd_report(report_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SchemaVersionError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const OverloadError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
