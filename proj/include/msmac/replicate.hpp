#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "msmac/analytic.hpp"
#include "msmac/assign.hpp"
#include "msmac/core.hpp"
#include "msmac/rng.hpp"
#include "msmac/sim.hpp"

namespace msmac {

// ---------------------------------------------------------------------------
// Single-slot mini-slot-delay experiments: n_m mini-slots of one target slot
// inside a 100-slot frame, devices sorted into mini-slots by increasing rate.
// ---------------------------------------------------------------------------

struct MiniSlotExperiment {
    int n_m = 10;
    int n_s = 100;               // slots per frame (equal cycles)
    double t_m = 9e-6, t_x = 133e-6;
    int devices_per_mini = 1;    // 7 for the shared-mini-slot runs
    double rate_lo = 0.2, rate_hi = 1.0;
    bool buffer = true;
    bool synccs = false;
    long frames = 20000;
    int repeats = 3;
    std::uint64_t seed = 1;
};

struct MiniSlotDelayRow {
    int mini = 0;
    double sim_delay_s = 0;       // mean over the mini-slot's devices and repeats
    double analytic_delay_s = 0;  // estimator chain evaluated on the same layout
    double spread = 0;            // max relative gap between sharers' delays
    std::vector<double> device_delay_s;
};

namespace detail {

struct LayoutRun {
    std::vector<DeviceProfile> devs;
    Assignment assign;
    std::vector<double> analytic;  // per mini-slot estimator delay
};

inline LayoutRun build_ladder(const MiniSlotExperiment& ex, std::uint64_t seed) {
    LayoutRun lr;
    const int n_dev = ex.n_m * ex.devices_per_mini;
    SplitMix64 rng(seed);
    std::vector<double> rates;
    for (int i = 0; i < n_dev; ++i) rates.push_back(rng.uniform(ex.rate_lo, ex.rate_hi));
    std::sort(rates.begin(), rates.end());
    for (int i = 0; i < n_dev; ++i) {
        lr.devs.push_back(
            {i + 1, PriorityClass::LP, rates[i], ArrivalPattern::Poisson, 0.0});
        lr.assign.anchor.push_back(Anchor{1, i / ex.devices_per_mini + 1});
    }
    lr.assign.success = true;
    lr.assign.assigned_count = n_dev;

    // estimator chain over the same layout: the frame length matches the
    // carrier-sensing mode (full-length slots when SyncCS is off)
    ProtocolParams p{ex.n_m, ex.n_s, ex.n_s, ex.n_s, ex.t_m, ex.t_x};
    double total = 0;
    for (const auto& d : lr.devs) total += d.rate;
    const CycleLengths cyc = derive_cycles(p, total, ex.synccs);
    const double t_f = cyc.t_f_l;
    double gamma = 0;
    for (int m = 1; m <= ex.n_m; ++m) {
        const double tau = adf_estimate(gamma);
        lr.analytic.push_back(overall_delay(tau, t_f, ex.t_x, t_f / 2));
        MiniSlotState cell;
        cell.tau = tau;
        cell.gamma = gamma;
        for (int j = 0; j < ex.devices_per_mini; ++j) {
            const int di = (m - 1) * ex.devices_per_mini + j;
            cell = state_after_add(cell, lr.devs[di].id, lr.devs[di].rate, t_f).state;
        }
        gamma = cell.gamma;
    }
    return lr;
}

} // namespace detail

// Runs one experiment configuration, averaging per-device delays over the
// repeats (rates are redrawn per repeat, as in the underlying figures).
inline std::vector<MiniSlotDelayRow> run_minislot_experiment(const MiniSlotExperiment& ex) {
    const int n_dev = ex.n_m * ex.devices_per_mini;
    std::vector<double> dev_delay(n_dev, 0.0);
    std::vector<double> analytic(ex.n_m, 0.0);

    for (int rep = 0; rep < ex.repeats; ++rep) {
        const std::uint64_t seed = mix_seed(ex.seed, static_cast<std::uint64_t>(rep));
        auto lr = detail::build_ladder(ex, seed);
        ProtocolParams p{ex.n_m, ex.n_s, ex.n_s, ex.n_s, ex.t_m, ex.t_x};
        SimOptions opt;
        opt.buffer = ex.buffer;
        opt.synccs = ex.synccs;
        opt.max_cycles = ex.frames;
        opt.warmup = 0.0;
        opt.seed = mix_seed(seed, 0xABCD);
        PerfReport rep_out = simulate(lr.devs, p, lr.assign, opt);
        for (int i = 0; i < n_dev; ++i) dev_delay[i] += rep_out.dev[i].mean_delay;
        for (int m = 0; m < ex.n_m; ++m) analytic[m] += lr.analytic[m];
    }
    for (auto& d : dev_delay) d /= ex.repeats;
    for (auto& a : analytic) a /= ex.repeats;

    std::vector<MiniSlotDelayRow> rows;
    for (int m = 0; m < ex.n_m; ++m) {
        MiniSlotDelayRow row;
        row.mini = m + 1;
        row.analytic_delay_s = analytic[m];
        double lo = 1e300, hi = 0, sum = 0;
        for (int j = 0; j < ex.devices_per_mini; ++j) {
            const double d = dev_delay[m * ex.devices_per_mini + j];
            row.device_delay_s.push_back(d);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            sum += d;
        }
        row.sim_delay_s = sum / ex.devices_per_mini;
        row.spread = lo > 0 ? (hi - lo) / lo : 0.0;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Full-scenario presets (device assignment + end-to-end simulation)
// ---------------------------------------------------------------------------

struct ScenarioPreset {
    std::string name;
    int n_hp = 0, n_rp = 0, n_lp = 0;
    double rate_lo = 1.0, rate_hi = 5.0;
    double qp_fraction = 0.5;    // share of quasi-periodic devices
    double qp_jitter = 0.05;
    ProtocolParams params;
    QosSpec qos;
    GuardMargins guards;
    double duration = 2000.0;
    std::uint64_t seed = 1;
};

inline QosSpec qos_vb() {
    QosSpec q;
    q.delta = {1e-3, 10e-3, 80e-3};
    q.rho = {0.015, 0.06, 0.10};
    return q;
}

// 1000 devices, 50/450/500 split, n_m=8, r=(5,45,270)
inline ScenarioPreset preset_fig5a() {
    ScenarioPreset s;
    s.name = "fig5a";
    s.n_hp = 50;
    s.n_rp = 450;
    s.n_lp = 500;
    s.params = ProtocolParams{8, 5, 45, 270, 9e-6, 133e-6};
    s.qos = qos_vb();
    s.guards.g = {1.5, 1.45, 1.05};
    return s;
}

// the (5,35,140) contrast: LP devices end up sharing mini-slots
inline ScenarioPreset preset_fig5b() {
    ScenarioPreset s = preset_fig5a();
    s.name = "fig5b";
    s.params.r_r = 35;
    s.params.r_l = 140;
    return s;
}

// 350 HP devices, n_m=4, r_h=6 (r_r, r_l chosen divisibility-consistent; the
// HP cycle length does not depend on them)
inline ScenarioPreset preset_fig6() {
    ScenarioPreset s;
    s.name = "fig6";
    s.n_hp = 350;
    s.params = ProtocolParams{4, 6, 54, 270, 9e-6, 133e-6};
    s.qos = qos_vb();
    s.guards.g = {1.40, 1.45, 1.05};
    return s;
}

inline std::vector<DeviceProfile> sample_devices(const ScenarioPreset& s) {
    std::vector<DeviceProfile> devs;
    SplitMix64 rng(s.seed);
    const int total = s.n_hp + s.n_rp + s.n_lp;
    for (int i = 1; i <= total; ++i) {
        const PriorityClass c = i <= s.n_hp                ? PriorityClass::HP
                                : i <= s.n_hp + s.n_rp     ? PriorityClass::RP
                                                           : PriorityClass::LP;
        const bool qp = rng.u01() < s.qp_fraction;
        devs.push_back({i, c, rng.uniform(s.rate_lo, s.rate_hi),
                        qp ? ArrivalPattern::QuasiPeriodic : ArrivalPattern::Poisson,
                        qp ? s.qp_jitter : 0.0});
    }
    return devs;
}

struct ScenarioRun {
    std::vector<DeviceProfile> devs;
    AssignOutcome assign;
    PerfReport report;
};

inline ScenarioRun run_scenario(const ScenarioPreset& s) {
    ScenarioRun run;
    run.devs = sample_devices(s);
    run.assign = overall_assign(run.devs, s.params, s.qos, s.guards);
    if (run.assign.assignment.success) {
        SimOptions opt;
        opt.duration = s.duration;
        opt.seed = mix_seed(s.seed, 0x51);
        opt.random_phase = true;
        run.report = simulate(run.devs, s.params, run.assign.assignment, opt);
        apply_qos(run.report, s.qos);
    }
    return run;
}

} // namespace msmac
