#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <vector>

#include "msmac/core.hpp"
#include "msmac/traffic.hpp"

namespace msmac {

// One simulation run is single-threaded and fully deterministic given the
// seed. Time advances in integer nanoseconds so 10^7-slot runs accumulate no
// floating-point drift.
struct SimOptions {
    bool buffer = true;
    bool synccs = true;
    bool smsa = true;        // informational; sharing arises from the assignment
    double duration = 0;     // seconds; ignored when max_cycles > 0
    double warmup = -1;      // seconds excluded from statistics; -1 = 5% of duration
    std::uint64_t seed = 1;
    long max_cycles = 0;     // stop after this many LP cycles when > 0
    bool random_phase = false;  // random phase offset for quasi-periodic devices
};

struct DeviceStats {
    int id = 0;
    PriorityClass cls = PriorityClass::LP;
    long generated = 0, delivered = 0, collided = 0, dropped = 0, queued_end = 0;
    double mean_delay = 0, max_delay = 0;  // seconds, delivered packets
    double collision_prob = 0;             // collided / (delivered + collided)
    bool qos_met = false;
};

struct ClassAgg {
    int devices = 0;
    double mean_delay = 0, max_delay = 0;        // mean/max of per-device means
    double mean_collision = 0, max_collision = 0;
    long generated = 0, delivered = 0, collided = 0, dropped = 0;
    bool qos_met = true;
};

struct PerfReport {
    std::vector<DeviceStats> dev;
    ClassTriple<ClassAgg> cls;
    double sim_time = 0;      // seconds actually simulated
    long cycles = 0;          // completed LP cycles
    double mean_cycle_s = 0;  // empirical LP cycle duration
};

namespace detail {

struct SimDevice {
    ArrivalGen gen;
    std::deque<std::int64_t> queue;  // arrival instants, ns
    bool exhausted = false;
    // statistics
    long generated = 0, delivered = 0, collided = 0, dropped = 0, queued_end = 0;
    double delay_sum = 0, delay_max = 0;
};

} // namespace detail

// Protocol semantics: slots run back to back inside repeating LP cycles. The
// first mini-slot (in index order) with a head-of-line packet at the slot
// boundary claims the slot; its ready devices transmit together right after
// that mini-slot. One transmitter is a success, two or more collide and the
// packets are lost. A claimed slot always spans n_m*t_m + t_x; an unclaimed
// slot truncates to n_m*t_m under SyncCS.
inline PerfReport simulate(const std::vector<DeviceProfile>& profiles,
                           const ProtocolParams& params, const Assignment& assignment,
                           const SimOptions& opt) {
    if (assignment.anchor.size() != profiles.size())
        throw std::invalid_argument("assignment does not match profiles");

    const std::int64_t tm = std::llround(params.t_m * 1e9);
    const std::int64_t tx = std::llround(params.t_x * 1e9);
    const std::int64_t slot_full = static_cast<std::int64_t>(params.n_m) * tm + tx;
    const std::int64_t slot_idle = static_cast<std::int64_t>(params.n_m) * tm;

    std::int64_t horizon = opt.max_cycles > 0 ? std::numeric_limits<std::int64_t>::max()
                                              : std::llround(opt.duration * 1e9);
    const double warmup_s = opt.warmup >= 0 ? opt.warmup
                                            : (opt.max_cycles > 0 ? 0.0 : 0.05 * opt.duration);
    const std::int64_t warmup = std::llround(warmup_s * 1e9);

    // static per-slot plan: occupant devices grouped by mini-slot, ascending
    struct Group {
        int mini;
        std::vector<int> devices;  // profile positions
    };
    std::vector<std::vector<Group>> plan(static_cast<size_t>(params.r_l) + 1);
    for (size_t i = 0; i < profiles.size(); ++i) {
        const Anchor& a = assignment.anchor[i];
        if (!a.assigned()) continue;
        for (int s : owned_slots(a, profiles[i].cls, params)) {
            auto& groups = plan[s];
            auto it = std::find_if(groups.begin(), groups.end(),
                                   [&](const Group& g) { return g.mini == a.mini; });
            if (it == groups.end()) {
                groups.push_back(Group{a.mini, {static_cast<int>(i)}});
            } else {
                it->devices.push_back(static_cast<int>(i));
            }
        }
    }
    for (auto& groups : plan)
        std::sort(groups.begin(), groups.end(),
                  [](const Group& a, const Group& b) { return a.mini < b.mini; });

    std::vector<detail::SimDevice> dev(profiles.size());
    for (size_t i = 0; i < profiles.size(); ++i)
        dev[i].gen = make_arrival_gen(profiles[i], opt.seed, opt.random_phase);

    const double horizon_s_limit =
        opt.max_cycles > 0 ? std::numeric_limits<double>::infinity() : opt.duration;

    // pull all arrivals up to t (ns) into the device queue
    auto pull = [&](detail::SimDevice& d, std::int64_t t) {
        while (!d.exhausted) {
            const double a_s = d.gen.peek();
            if (a_s >= horizon_s_limit) {
                d.exhausted = true;
                break;
            }
            const std::int64_t a = std::llround(a_s * 1e9);
            if (a > t) break;
            d.gen.pop();
            if (a >= warmup) ++d.generated;
            if (!opt.buffer && !d.queue.empty()) {
                if (a >= warmup) ++d.dropped;
            } else {
                d.queue.push_back(a);
            }
        }
    };

    std::int64_t now = 0;
    std::int64_t last_cycle_end = 0;
    long cycles_done = 0;
    std::vector<int> ready;
    bool stop = false;

    while (!stop) {
        if (opt.max_cycles > 0 && cycles_done >= opt.max_cycles) break;
        for (int s = 1; s <= params.r_l && !stop; ++s) {
            if (now >= horizon) {
                stop = true;
                break;
            }
            const std::int64_t slot_start = now;
            int claim_mini = 0;
            for (const Group& g : plan[s]) {
                ready.clear();
                for (int di : g.devices) {
                    auto& d = dev[di];
                    pull(d, slot_start);
                    if (!d.queue.empty()) ready.push_back(di);
                }
                if (!ready.empty()) {
                    claim_mini = g.mini;
                    const std::int64_t tx_end =
                        slot_start + static_cast<std::int64_t>(g.mini) * tm + tx;
                    if (ready.size() == 1) {
                        auto& d = dev[ready[0]];
                        const std::int64_t arr = d.queue.front();
                        d.queue.pop_front();
                        if (arr >= warmup) {
                            ++d.delivered;
                            const double delay = static_cast<double>(tx_end - arr) * 1e-9;
                            d.delay_sum += delay;
                            d.delay_max = std::max(d.delay_max, delay);
                        }
                    } else {
                        for (int di : ready) {
                            auto& d = dev[di];
                            const std::int64_t arr = d.queue.front();
                            d.queue.pop_front();
                            if (arr >= warmup) ++d.collided;
                        }
                    }
                    break;
                }
            }
            now += (claim_mini > 0) ? slot_full : (opt.synccs ? slot_idle : slot_full);
        }
        if (!stop) {
            ++cycles_done;
            last_cycle_end = now;
        }
    }

    const std::int64_t end_time = opt.max_cycles > 0 ? now : std::min(now, horizon);
    const std::int64_t flush_to =
        opt.max_cycles > 0 ? end_time : std::llround(opt.duration * 1e9);

    PerfReport rep;
    rep.sim_time = static_cast<double>(end_time) * 1e-9;
    rep.cycles = cycles_done;
    rep.mean_cycle_s =
        cycles_done > 0 ? static_cast<double>(last_cycle_end) * 1e-9 / cycles_done : 0.0;

    rep.dev.resize(profiles.size());
    for (size_t i = 0; i < profiles.size(); ++i) {
        auto& d = dev[i];
        // account for arrivals between the last processed slot and the horizon
        pull(d, flush_to - 1);
        for (std::int64_t a : d.queue)
            if (a >= warmup) ++d.queued_end;

        DeviceStats& s = rep.dev[i];
        s.id = profiles[i].id;
        s.cls = profiles[i].cls;
        s.generated = d.generated;
        s.delivered = d.delivered;
        s.collided = d.collided;
        s.dropped = d.dropped;
        s.queued_end = d.queued_end;
        s.mean_delay = d.delivered > 0 ? d.delay_sum / static_cast<double>(d.delivered) : 0.0;
        s.max_delay = d.delay_max;
        const long tx_cnt = d.delivered + d.collided;
        s.collision_prob = tx_cnt > 0 ? static_cast<double>(d.collided) / tx_cnt : 0.0;
    }

    for (PriorityClass c : {PriorityClass::HP, PriorityClass::RP, PriorityClass::LP}) {
        ClassAgg& agg = rep.cls.of(c);
        int n_delay = 0, n_coll = 0;
        for (const auto& s : rep.dev) {
            if (s.cls != c) continue;
            ++agg.devices;
            agg.generated += s.generated;
            agg.delivered += s.delivered;
            agg.collided += s.collided;
            agg.dropped += s.dropped;
            if (s.delivered > 0) {
                ++n_delay;
                agg.mean_delay += s.mean_delay;
                agg.max_delay = std::max(agg.max_delay, s.mean_delay);
            }
            if (s.delivered + s.collided > 0) {
                ++n_coll;
                agg.mean_collision += s.collision_prob;
                agg.max_collision = std::max(agg.max_collision, s.collision_prob);
            }
        }
        if (n_delay > 0) agg.mean_delay /= n_delay;
        if (n_coll > 0) agg.mean_collision /= n_coll;
    }
    return rep;
}

// Fills qos_met given the thresholds: a device meets QoS when its mean delay
// and collision probability are within its class limits.
inline void apply_qos(PerfReport& rep, const QosSpec& qos) {
    ClassTriple<bool> ok{true, true, true};
    for (auto& d : rep.dev) {
        const double delta = qos.delta.of(d.cls);
        const double rho = qos.rho.of(d.cls);
        d.qos_met = (d.delivered == 0 || d.mean_delay <= delta) && d.collision_prob <= rho;
        if (!d.qos_met) ok.of(d.cls) = false;
    }
    rep.cls.hp.qos_met = ok.hp;
    rep.cls.rp.qos_met = ok.rp;
    rep.cls.lp.qos_met = ok.lp;
}

} // namespace msmac
