#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "msmac/analytic.hpp"
#include "msmac/assign.hpp"
#include "msmac/core.hpp"

namespace msmac {

struct CapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleCaps {
    int max_devices = 8;
    int max_nm = 3;
    int max_rl = 4;
    long node_budget = 20'000'000;  // DFS placements before giving up
};

// Exhaustive feasibility oracle over class-respecting assignments, evaluated
// with the same analytic estimators as the greedy assigner. Devices are
// considered in canonical (class, rate, id) order so the discounted gamma
// chain is well defined. Returns an assignment satisfying every threshold if
// one exists, std::nullopt if the instance is provably infeasible.
class BruteForceAssigner {
public:
    BruteForceAssigner(const std::vector<DeviceProfile>& profiles, const ProtocolParams& params,
                       const QosSpec& qos, const OracleCaps& caps, const GuardMargins& guards = {})
        : profiles_(profiles), params_(params), qos_(qos), caps_(caps), guards_(guards) {
        if (static_cast<int>(profiles.size()) > caps.max_devices || params.n_m > caps.max_nm ||
            params.r_l > caps.max_rl)
            throw CapExceeded("instance exceeds oracle caps");
        double total = 0;
        for (const auto& d : profiles) total += d.rate;
        cycles_ = derive_cycles(params, total);
        order_.resize(profiles.size());
        for (size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<int>(i);
        std::sort(order_.begin(), order_.end(), [&](int a, int b) {
            if (profiles[a].cls != profiles[b].cls) return profiles[a].cls < profiles[b].cls;
            if (profiles[a].rate != profiles[b].rate) return profiles[a].rate < profiles[b].rate;
            return profiles[a].id < profiles[b].id;
        });
        anchors_.assign(profiles.size(), Anchor{});
    }

    std::optional<Assignment> solve() {
        nodes_ = 0;
        if (dfs(0)) {
            Assignment a;
            a.anchor = anchors_;
            a.success = true;
            a.assigned_count = static_cast<int>(profiles_.size());
            return a;
        }
        return std::nullopt;
    }

private:
    // true iff slot ranges of the two anchored devices overlap somewhere in
    // [1, r_l] at the same mini-slot
    bool cells_overlap(int pa, int pb) const {
        const Anchor &a = anchors_[pa], &b = anchors_[pb];
        if (a.mini != b.mini) return false;
        const auto sa = owned_slots(a, profiles_[pa].cls, params_);
        for (int s : sa) {
            const int rb = params_.r_of(profiles_[pb].cls);
            const bool rep = profiles_[pb].cls != PriorityClass::LP;
            if (rep ? (s % rb == b.slot % rb) : (s == b.slot)) return true;
        }
        return false;
    }

    // devices (by canonical order position < upto) owning (slot, mini) once
    // replication is unfolded
    std::vector<int> owners_of(int slot, int mini, size_t upto) const {
        std::vector<int> out;
        for (size_t oi = 0; oi < upto; ++oi) {
            const int p = order_[oi];
            const Anchor& an = anchors_[p];
            if (!an.assigned() || an.mini != mini) continue;
            const int rc = params_.r_of(profiles_[p].cls);
            const bool rep = profiles_[p].cls != PriorityClass::LP;
            if (rep ? (slot % rc == an.slot % rc) : (slot == an.slot)) out.push_back(p);
        }
        return out;
    }

    // mini-slot collision estimate via the same update chain as the assigner
    double cell_collision(const std::vector<int>& members) const {
        MiniSlotState st;
        for (int p : members)
            st = state_after_add(st, profiles_[p].id, profiles_[p].rate,
                                 cycles_.t_f(profiles_[p].cls))
                     .state;
        return st.q_c;
    }

    // accumulated expected arrivals in mini-slots 1..mini-1 of `slot`
    double gamma_preceding(int slot, int mini, size_t upto) const {
        double g = 0;
        for (int m = 1; m < mini; ++m) {
            MiniSlotState st;
            for (int p : owners_of(slot, m, upto))
                st = state_after_add(st, profiles_[p].id, profiles_[p].rate,
                                     cycles_.t_f(profiles_[p].cls))
                         .state;
            g += st.gamma;
        }
        return g;
    }

    // all placed devices (order positions < upto) satisfy delay and collision
    bool placed_ok(size_t upto) {
        for (size_t oi = 0; oi < upto; ++oi) {
            const int p = order_[oi];
            const auto cls = profiles_[p].cls;
            const Anchor& an = anchors_[p];
            const auto members = owners_of(an.slot, an.mini, upto);
            const double q = cell_collision(members);
            if (guards_.g.of(cls) * q > qos_.rho.of(cls)) return false;
            const double tau = adf_estimate(gamma_preceding(an.slot, an.mini, upto));
            const double d = overall_delay(tau, cycles_.t_f(cls), params_.t_x, cycles_.tau0(cls));
            if (d > qos_.delta.of(cls)) return false;
        }
        return true;
    }

    bool dfs(size_t oi) {
        if (oi == order_.size()) return true;
        const int p = order_[oi];
        const auto cls = profiles_[p].cls;
        const int rc = params_.r_of(cls);
        for (int slot = 1; slot <= rc; ++slot) {
            for (int mini = 1; mini <= params_.n_m; ++mini) {
                if (++nodes_ > caps_.node_budget)
                    throw CapExceeded("oracle node budget exceeded");
                anchors_[p] = Anchor{slot, mini};
                bool clash = false;
                for (size_t oj = 0; oj < oi && !clash; ++oj) {
                    const int q = order_[oj];
                    if (profiles_[q].cls != cls && cells_overlap(p, q)) clash = true;
                }
                if (!clash && placed_ok(oi + 1) && dfs(oi + 1)) return true;
                anchors_[p] = Anchor{};
            }
        }
        return false;
    }

    const std::vector<DeviceProfile>& profiles_;
    ProtocolParams params_;
    QosSpec qos_;
    OracleCaps caps_;
    GuardMargins guards_;
    CycleLengths cycles_;
    std::vector<int> order_;
    std::vector<Anchor> anchors_;
    long nodes_ = 0;
};

inline std::optional<Assignment> brute_force_assign(const std::vector<DeviceProfile>& profiles,
                                                    const ProtocolParams& params,
                                                    const QosSpec& qos, const OracleCaps& caps = {},
                                                    const GuardMargins& guards = {}) {
    return BruteForceAssigner(profiles, params, qos, caps, guards).solve();
}

} // namespace msmac
