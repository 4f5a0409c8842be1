#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmac {

// ---------------------------------------------------------------------------
// Priority classes. Ordering HP < RP < LP is total and used for sorting and
// reporting throughout.
// ---------------------------------------------------------------------------
enum class PriorityClass : int { HP = 0, RP = 1, LP = 2 };

inline constexpr int kNumClasses = 3;

inline const char* to_string(PriorityClass c) {
    switch (c) {
        case PriorityClass::HP: return "HP";
        case PriorityClass::RP: return "RP";
        case PriorityClass::LP: return "LP";
    }
    return "?";
}

inline PriorityClass class_from_string(const std::string& s) {
    if (s == "HP" || s == "hp") return PriorityClass::HP;
    if (s == "RP" || s == "rp") return PriorityClass::RP;
    if (s == "LP" || s == "lp") return PriorityClass::LP;
    throw std::invalid_argument("unknown priority class: " + s);
}

// Per-class triple of values, indexable by PriorityClass.
template <typename T>
struct ClassTriple {
    T hp{}, rp{}, lp{};

    ClassTriple() = default;
    ClassTriple(T h, T r, T l) : hp(h), rp(r), lp(l) {}

    T& of(PriorityClass c) {
        switch (c) {
            case PriorityClass::HP: return hp;
            case PriorityClass::RP: return rp;
            default: return lp;
        }
    }
    const T& of(PriorityClass c) const {
        return const_cast<ClassTriple*>(this)->of(c);
    }
};

enum class ArrivalPattern : int { Poisson = 0, QuasiPeriodic = 1 };

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct DeviceProfile {
    int id = 0;                 // 1-based, unique and dense within a scenario
    PriorityClass cls = PriorityClass::LP;
    double rate = 0.0;          // packets per second, > 0
    ArrivalPattern pattern = ArrivalPattern::Poisson;
    double jitter = 0.0;        // quasi-periodic only, fraction of the interval
};

struct ProtocolParams {
    int n_m = 1;                // mini-slots per slot
    int r_h = 1, r_r = 1, r_l = 1;  // slots per HP/RP/LP assignment cycle
    double t_m = 9e-6;          // mini-slot duration, seconds
    double t_x = 133e-6;        // transmission duration, seconds

    double slot_full() const { return n_m * t_m + t_x; }
    double slot_idle() const { return n_m * t_m; }
    int r_of(PriorityClass c) const {
        switch (c) {
            case PriorityClass::HP: return r_h;
            case PriorityClass::RP: return r_r;
            default: return r_l;
        }
    }
};

struct QosSpec {
    ClassTriple<double> delta;  // delay requirement per class, seconds
    ClassTriple<double> rho;    // collision probability requirement per class
};

// Multiplicative guard applied to estimated collision probabilities before
// comparing against rho. 1.0 disables the guard.
struct GuardMargins {
    ClassTriple<double> g{1.0, 1.0, 1.0};
};

struct Anchor {
    int slot = 0;       // 1-based; 0 = unassigned
    int mini = 0;
    bool assigned() const { return slot > 0 && mini > 0; }
};

// Device assignment: the first (slot, mini-slot) per device. HP/RP ownership
// replicates across congruent slots; LP anchors are one-shot per cycle.
struct Assignment {
    std::vector<Anchor> anchor;   // indexed like the profile list
    bool success = false;         // F_s
    int assigned_count = 0;       // N_a
    int fail_device = 0;          // F: device id that failed the delay check, 0 if none
};

// Slots in [1, r_l] owned by a device anchored at `a`.
inline std::vector<int> owned_slots(const Anchor& a, PriorityClass cls, const ProtocolParams& p) {
    std::vector<int> out;
    if (!a.assigned()) return out;
    if (cls == PriorityClass::LP) {
        out.push_back(a.slot);
        return out;
    }
    const int step = (cls == PriorityClass::HP) ? p.r_h : p.r_r;
    for (int s = a.slot; s <= p.r_l; s += step) out.push_back(s);
    return out;
}

// Scheduler state of one mini-slot during assignment.
struct MiniSlotState {
    double q_c = 0.0;         // collision probability estimate
    double lambda_agg = 0.0;  // aggregated arrival rate
    double gamma = 0.0;       // accumulated expected arrivals per cycle, mini-slots 1..m
    double tau = 1.0;         // access delay in frames, >= 1
    std::vector<int> occupants;        // device ids
    std::vector<double> occupant_rates;
};

struct ValidationResult {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;
    bool ok() const { return violations.empty(); }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

inline ValidationResult validate_scenario(const std::vector<DeviceProfile>& profiles,
                                          const ProtocolParams& params,
                                          const QosSpec& qos) {
    ValidationResult r;
    auto bad = [&r](const std::string& m) { r.violations.push_back(m); };

    if (params.n_m < 1) bad("n_m must be >= 1");
    if (params.r_h < 1 || params.r_r < 1 || params.r_l < 1) bad("cycle lengths must be >= 1");
    if (params.r_h >= 1 && params.r_r % params.r_h != 0) bad("r_r not multiple of r_h");
    if (params.r_r >= 1 && params.r_l % params.r_r != 0) bad("r_l not multiple of r_r");
    if (params.t_m <= 0) bad("t_m must be > 0");
    if (params.t_x <= 0) bad("t_x must be > 0");

    for (PriorityClass c : {PriorityClass::HP, PriorityClass::RP, PriorityClass::LP}) {
        if (qos.delta.of(c) <= 0) bad(std::string("delta(") + to_string(c) + ") must be > 0");
        if (qos.rho.of(c) < 0 || qos.rho.of(c) > 1)
            bad(std::string("rho(") + to_string(c) + ") must be in [0,1]");
    }

    if (profiles.empty()) r.warnings.push_back("no devices");
    std::set<int> ids;
    double total_rate = 0;
    for (const auto& d : profiles) {
        if (d.rate <= 0) bad("device " + std::to_string(d.id) + ": rate must be > 0");
        if (!ids.insert(d.id).second) bad("duplicate device id " + std::to_string(d.id));
        if (d.pattern == ArrivalPattern::QuasiPeriodic && (d.jitter < 0 || d.jitter >= 0.5))
            bad("device " + std::to_string(d.id) + ": jitter_fraction must be in [0, 0.5)");
        total_rate += d.rate;
    }
    if (total_rate * params.t_x >= 1.0)
        r.warnings.push_back("aggregate load lambda*t_x >= 1: system overloaded");
    return r;
}

// Checks an assignment against the structural scheduling constraints:
// anchors within the class cycle, no mini-slot shared across classes once
// HP/RP replication is unfolded.
inline ValidationResult validate_assignment(const std::vector<DeviceProfile>& profiles,
                                            const ProtocolParams& params,
                                            const Assignment& a) {
    ValidationResult r;
    auto bad = [&r](const std::string& m) { r.violations.push_back(m); };
    if (a.anchor.size() != profiles.size()) {
        bad("anchor count does not match device count");
        return r;
    }
    // class of the claiming device per (slot, mini) cell, -1 = free
    std::vector<int> cell_class(static_cast<size_t>(params.r_l) * params.n_m, -1);
    for (size_t i = 0; i < profiles.size(); ++i) {
        const Anchor& an = a.anchor[i];
        if (!an.assigned()) continue;
        const auto& d = profiles[i];
        const int rc = params.r_of(d.cls);
        if (an.slot < 1 || an.slot > rc)
            bad("device " + std::to_string(d.id) + ": anchor slot outside class cycle");
        if (an.mini < 1 || an.mini > params.n_m)
            bad("device " + std::to_string(d.id) + ": anchor mini-slot out of range");
        if (!r.violations.empty()) continue;
        for (int s : owned_slots(an, d.cls, params)) {
            int& c = cell_class[static_cast<size_t>(s - 1) * params.n_m + (an.mini - 1)];
            if (c == -1) {
                c = static_cast<int>(d.cls);
            } else if (c != static_cast<int>(d.cls)) {
                bad("mini-slot " + std::to_string(an.mini) + " of slot " + std::to_string(s) +
                    " hosts more than one priority class");
            }
        }
    }
    return r;
}

} // namespace msmac
