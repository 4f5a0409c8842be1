#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "msmac/analytic.hpp"
#include "msmac/core.hpp"

namespace msmac {

// Per-slot scheduler state during assignment. `cursor` is the lowest
// mini-slot of the slot still open to new devices (m-hat); it only advances.
// `cell` is the cursor mini-slot's state; cell.gamma accumulates over all
// mini-slots 1..cursor of the slot, and cell.tau is frozen when the cursor
// enters a fresh mini-slot (same-mini-slot sharing never changes it).
struct SlotState {
    int cursor = 1;      // in [1, n_m + 1]; n_m + 1 means exhausted
    MiniSlotState cell;

    // Move to the next mini-slot: gamma carries over, everything else resets.
    void advance() {
        ++cursor;
        const double g = cell.gamma;
        cell = MiniSlotState{};
        cell.gamma = g;
        cell.tau = adf_estimate(g);
    }
};

struct ClassConstants {
    double t_f = 0;    // assignment cycle length, seconds
    double t_x = 0;    // transmission duration, seconds
    double tau0 = 0;   // base delay, seconds
    double delta = 0;  // delay requirement
    double rho = 0;    // collision requirement
    double guard = 1;  // multiplier on estimated collision before the rho test
};

struct ClassAssignInput {
    std::vector<int> device_pos;   // positions into the profile list, one class,
                                   // sorted by nondecreasing rate
    std::vector<double> rates;     // parallel to device_pos
    std::vector<int> device_ids;   // parallel to device_pos
    std::vector<int> slot_pool;    // candidate slot indices (ascending)
    int n_m = 1;
    ClassConstants k;
};

struct CoreAssignResult {
    int n_assigned = 0;
    int fail_device = 0;  // device id that failed the delay check (flag F), 0 if none
    bool complete = false;
    // parallel to the input device list; unassigned entries keep slot=mini=0
    std::vector<Anchor> anchors;
    std::vector<double> est_delay;
    std::vector<double> est_collision;
};

// Core assignment for one priority class. `slots` is 1-based (size >= r_l+1)
// and carries cursor/gamma/tau state across class passes.
inline CoreAssignResult core_assign(const ClassAssignInput& in, std::vector<SlotState>& slots) {
    CoreAssignResult out;
    const size_t n = in.device_pos.size();
    out.anchors.resize(n);
    out.est_delay.assign(n, 0.0);
    out.est_collision.assign(n, 0.0);

    std::vector<int> pool = in.slot_pool;  // only ever shrinks during the pass
    std::vector<int> feasible;

    for (size_t di = 0; di < n; ++di) {
        const double lambda = in.rates[di];
        bool committed = false;

        while (!committed) {
            if (pool.empty()) {  // no vacant mini-slot anywhere
                out.n_assigned = static_cast<int>(di);
                return out;
            }

            // delay check at the current cursors
            double min_delay = std::numeric_limits<double>::infinity();
            for (int l : pool)
                min_delay = std::min(
                    min_delay, overall_delay(slots[l].cell.tau, in.k.t_f, in.k.t_x, in.k.tau0));
            if (min_delay > in.k.delta) {
                out.n_assigned = static_cast<int>(di);
                out.fail_device = in.device_ids[di];
                return out;
            }
            feasible.clear();
            for (int l : pool)
                if (overall_delay(slots[l].cell.tau, in.k.t_f, in.k.t_x, in.k.tau0) <= in.k.delta)
                    feasible.push_back(l);

            // tentative collision per feasible slot; argmin with lowest-index tie-break
            int best_slot = -1;
            double best_q = std::numeric_limits<double>::infinity();
            bool any_open_cursor = false;
            for (int l : feasible) {
                const auto& c = slots[l].cell;
                const double q = collision_after_add(c.q_c, in.k.t_f, lambda, c.occupants.size());
                if (q < best_q) {
                    best_q = q;
                    best_slot = l;
                }
                if (slots[l].cursor < in.n_m) any_open_cursor = true;
            }

            if (in.k.guard * best_q > in.k.rho) {
                if (!any_open_cursor) {  // every feasible cursor is at the last mini-slot
                    out.n_assigned = static_cast<int>(di);
                    return out;
                }
                // move to the next mini-slot in the still-open slots and retry
                std::vector<int> next_pool;
                for (int l : feasible)
                    if (slots[l].cursor < in.n_m) {
                        slots[l].advance();
                        next_pool.push_back(l);
                    }
                pool = std::move(next_pool);
                continue;
            }

            // commit
            auto& st = slots[best_slot];
            out.anchors[di] = Anchor{best_slot, st.cursor};
            out.est_delay[di] = overall_delay(st.cell.tau, in.k.t_f, in.k.t_x, in.k.tau0);
            out.est_collision[di] = best_q;
            st.cell = state_after_add(st.cell, in.device_ids[di], lambda, in.k.t_f).state;
            committed = true;
        }
    }
    out.n_assigned = static_cast<int>(n);
    out.complete = true;
    return out;
}

struct AssignOutcome {
    Assignment assignment;
    CycleLengths cycles;
    // indexed like the profile list; zero for unassigned devices
    std::vector<double> est_delay;
    std::vector<double> est_collision;
};

// Overall assignment across HP -> RP -> LP with cycle extension. After a
// fully assigned class, every base slot's cursor advances by one and the
// cursor/gamma state replicates to congruent slots of the next cycle range.
inline AssignOutcome overall_assign(const std::vector<DeviceProfile>& profiles,
                                    const ProtocolParams& params, const QosSpec& qos,
                                    const GuardMargins& guards = {}, bool synccs = true) {
    double total_rate = 0;
    for (const auto& d : profiles) total_rate += d.rate;

    AssignOutcome out;
    out.cycles = derive_cycles(params, total_rate, synccs);
    out.assignment.anchor.assign(profiles.size(), Anchor{});
    out.est_delay.assign(profiles.size(), 0.0);
    out.est_collision.assign(profiles.size(), 0.0);

    std::vector<SlotState> slots(static_cast<size_t>(params.r_l) + 1);

    int assigned_total = 0;
    bool all_ok = true;

    const PriorityClass order[] = {PriorityClass::HP, PriorityClass::RP, PriorityClass::LP};
    int prev_range = 0;       // slot range covered by the previous class (0 before HP)
    bool prev_nonempty = false;

    for (PriorityClass cls : order) {
        if (!all_ok) break;  // an incomplete class stops the whole assignment
        const int range = params.r_of(cls);

        if (prev_range > 0) {
            // close the previous class's cursor mini-slot (it may not host two
            // classes), then extend to the longer cycle by copying the
            // congruent base slot's cursor and gamma
            if (prev_nonempty)
                for (int l = 1; l <= prev_range; ++l) slots[l].advance();
            for (int l = prev_range + 1; l <= range; ++l)
                slots[l] = slots[(l - 1) % prev_range + 1];
        }
        prev_range = range;

        ClassAssignInput in;
        in.n_m = params.n_m;
        in.k = ClassConstants{out.cycles.t_f(cls), params.t_x,     out.cycles.tau0(cls),
                              qos.delta.of(cls),   qos.rho.of(cls), guards.g.of(cls)};
        for (int l = 1; l <= range; ++l)
            if (slots[l].cursor <= params.n_m) in.slot_pool.push_back(l);

        for (size_t i = 0; i < profiles.size(); ++i)
            if (profiles[i].cls == cls) in.device_pos.push_back(static_cast<int>(i));
        std::sort(in.device_pos.begin(), in.device_pos.end(), [&](int a, int b) {
            if (profiles[a].rate != profiles[b].rate) return profiles[a].rate < profiles[b].rate;
            return profiles[a].id < profiles[b].id;
        });
        for (int p : in.device_pos) {
            in.rates.push_back(profiles[p].rate);
            in.device_ids.push_back(profiles[p].id);
        }

        CoreAssignResult res = core_assign(in, slots);
        prev_nonempty = res.n_assigned > 0;
        for (size_t j = 0; j < in.device_pos.size(); ++j) {
            const int p = in.device_pos[j];
            out.assignment.anchor[p] = res.anchors[j];
            out.est_delay[p] = res.est_delay[j];
            out.est_collision[p] = res.est_collision[j];
        }
        assigned_total += res.n_assigned;
        if (!res.complete) {
            all_ok = false;
            if (res.fail_device != 0 && out.assignment.fail_device == 0)
                out.assignment.fail_device = res.fail_device;
        }
    }

    out.assignment.assigned_count = assigned_total;
    out.assignment.success = (static_cast<size_t>(assigned_total) == profiles.size());
    return out;
}

} // namespace msmac
