#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>

#include "msmac/core.hpp"

namespace msmac {

struct OverloadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cycle lengths and base delays per class, seconds.
struct CycleLengths {
    double t_f_h = 0, t_f_r = 0, t_f_l = 0;
    double tau0_h = 0, tau0_r = 0, tau0_l = 0;

    double t_f(PriorityClass c) const {
        switch (c) {
            case PriorityClass::HP: return t_f_h;
            case PriorityClass::RP: return t_f_r;
            default: return t_f_l;
        }
    }
    double tau0(PriorityClass c) const {
        switch (c) {
            case PriorityClass::HP: return tau0_h;
            case PriorityClass::RP: return tau0_r;
            default: return tau0_l;
        }
    }
};

// Upper bound on the slots per HP assignment cycle:
//   floor(2*delta_h / (n_m*t_m + t_x)).
// Returns 0 when even a single-slot cycle cannot meet delta_h.
inline int max_hp_cycle(double delta_h, int n_m, double t_m, double t_x) {
    const double slot = n_m * t_m + t_x;
    return static_cast<int>(std::floor(2.0 * delta_h / slot));
}

// LP cycle length: r_l*n_m*t_m / (1 - sum(lambda_i*t_x)). The denominator
// assumes every device transmits at least once per LP cycle and idle slots
// shrink to the mini-slot header.
inline double lp_cycle_length(int r_l, int n_m, double t_m, double t_x, double total_rate) {
    const double load = total_rate * t_x;
    if (load >= 1.0) throw OverloadError("aggregate load lambda*t_x >= 1");
    return r_l * n_m * t_m / (1.0 - load);
}

inline double lp_cycle_length(int r_l, int n_m, double t_m, double t_x,
                              std::span<const double> rates) {
    return lp_cycle_length(r_l, n_m, t_m, t_x,
                           std::accumulate(rates.begin(), rates.end(), 0.0));
}

// Derives all three cycle lengths and the base delays tau_0 = T_f/2.
// With synccs=false slots never truncate, so frames have fixed length
// r * (n_m*t_m + t_x) independent of load.
inline CycleLengths derive_cycles(const ProtocolParams& p, double total_rate,
                                  bool synccs = true) {
    CycleLengths c;
    if (synccs) {
        c.t_f_l = lp_cycle_length(p.r_l, p.n_m, p.t_m, p.t_x, total_rate);
    } else {
        c.t_f_l = p.r_l * p.slot_full();
    }
    c.t_f_r = c.t_f_l * p.r_r / p.r_l;
    c.t_f_h = c.t_f_l * p.r_h / p.r_l;
    c.tau0_h = c.t_f_h / 2;
    c.tau0_r = c.t_f_r / 2;
    c.tau0_l = c.t_f_l / 2;
    return c;
}

// Access delay in frames for a mini-slot whose preceding mini-slots carry
// `gamma_preceding` expected arrivals per cycle. The slot is stolen with
// probability 1 - exp(-gamma), so the expected number of owned occurrences
// until a win is exp(gamma). Exact at gamma=0 (tau=1) and independent of
// same-mini-slot sharers.
inline double adf_estimate(double gamma_preceding) {
    if (gamma_preceding < 0) throw InvalidState("gamma must be >= 0");
    return std::exp(gamma_preceding);
}

// Overall delay estimate: (tau - 1)*T_f + T_x + tau_0.
inline double overall_delay(double tau, double t_f, double t_x, double tau0) {
    return (tau - 1.0) * t_f + t_x + tau0;
}

// Collision probability of a mini-slot after adding a device with rate
// lambda. First occupant: 0. Otherwise 1 - (1-q_c)(1 - T_f*lambda), clamped
// to [0, 1].
inline double collision_after_add(double q_c_current, double t_f_dagger, double lambda_i,
                                  std::size_t existing_occupants) {
    if (existing_occupants == 0) return 0.0;
    const double q = 1.0 - (1.0 - q_c_current) * (1.0 - t_f_dagger * lambda_i);
    return std::clamp(q, 0.0, 1.0);
}

struct AddResult {
    MiniSlotState state;
    double n_c = 1.0;  // expected simultaneous packets given this device transmits
};

// State update for assigning a device to a mini-slot. First occupant uses the
// initialization form; sharing uses the discounted form. tau is unchanged in
// both cases: the access delay depends only on preceding mini-slots.
inline AddResult state_after_add(const MiniSlotState& state, int device_id, double lambda_i,
                                 double t_f_dagger) {
    AddResult r;
    r.state = state;
    if (state.occupants.empty()) {
        r.state.q_c = 0.0;
        r.n_c = 1.0;
        r.state.lambda_agg = lambda_i;
        r.state.gamma = state.gamma + t_f_dagger * lambda_i;
    } else {
        const double q_new = collision_after_add(state.q_c, t_f_dagger, lambda_i,
                                                 state.occupants.size());
        double others = 0.0;
        for (double lj : state.occupant_rates) others += state.tau * t_f_dagger * lj;
        r.n_c = 1.0 + others;
        if (r.n_c < 1.0) throw InvalidState("n_i^c < 1");
        const double share = lambda_i * (1.0 - q_new / r.n_c);
        r.state.q_c = q_new;
        r.state.lambda_agg = state.lambda_agg + share;
        r.state.gamma = state.gamma + t_f_dagger * share;
    }
    r.state.occupants.push_back(device_id);
    r.state.occupant_rates.push_back(lambda_i);
    return r;
}

} // namespace msmac
