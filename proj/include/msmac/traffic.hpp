#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <vector>

#include "msmac/core.hpp"
#include "msmac/rng.hpp"

namespace msmac {

struct ArrivalStream {
    int device_id = 0;
    std::vector<double> instants;  // strictly increasing, within [0, duration)
};

inline std::uint64_t stream_seed(std::uint64_t scenario_seed, int device_id) {
    return mix_seed(scenario_seed, static_cast<std::uint64_t>(device_id));
}

// Incremental arrival generator. Produces the exact same sequence as the
// materialized gen_* functions below; the simulator consumes this form so a
// long run never has to hold full streams in memory.
class ArrivalGen {
public:
    ArrivalGen() = default;

    static ArrivalGen poisson(double rate, std::uint64_t seed) {
        ArrivalGen g;
        g.rate_ = rate;
        g.rng_ = SplitMix64(seed);
        g.poisson_ = true;
        if (rate > 0) g.next_ = g.rng_.exponential(rate);
        else g.next_ = std::numeric_limits<double>::infinity();
        return g;
    }

    // First arrival at (1 + phase + u_1)/rate; phase is a fraction of the
    // interval in [0, 1). Jitter u_k is uniform in [-jf, +jf].
    static ArrivalGen quasi_periodic(double rate, double jitter_fraction,
                                     std::uint64_t seed, double phase_fraction = 0.0) {
        ArrivalGen g;
        g.rate_ = rate;
        g.rng_ = SplitMix64(seed);
        g.poisson_ = false;
        g.jitter_ = jitter_fraction;
        g.phase_ = phase_fraction;
        if (rate <= 0) g.next_ = std::numeric_limits<double>::infinity();
        else g.next_ = g.periodic_instant(1);
        return g;
    }

    double peek() const { return next_; }

    double pop() {
        double t = next_;
        if (poisson_) {
            next_ += rng_.exponential(rate_);
        } else {
            ++k_;
            next_ = periodic_instant(k_ + 1);
        }
        return t;
    }

private:
    double periodic_instant(std::uint64_t k) {
        const double u = rng_.uniform(-jitter_, jitter_);
        return (static_cast<double>(k) + phase_ + u) / rate_;
    }

    SplitMix64 rng_;
    double rate_ = 0, jitter_ = 0, phase_ = 0;
    double next_ = std::numeric_limits<double>::infinity();
    bool poisson_ = true;
    std::uint64_t k_ = 0;
};

inline ArrivalGen make_arrival_gen(const DeviceProfile& d, std::uint64_t scenario_seed,
                                   bool random_phase) {
    const std::uint64_t seed = stream_seed(scenario_seed, d.id);
    if (d.pattern == ArrivalPattern::Poisson) return ArrivalGen::poisson(d.rate, seed);
    double phase = 0.0;
    if (random_phase) {
        SplitMix64 pr(mix_seed(seed, 0x9e37));
        phase = pr.u01();
    }
    return ArrivalGen::quasi_periodic(d.rate, d.jitter, seed, phase);
}

inline ArrivalStream gen_poisson(double rate, double duration, std::uint64_t seed) {
    ArrivalStream s;
    ArrivalGen g = ArrivalGen::poisson(rate, seed);
    while (g.peek() < duration) s.instants.push_back(g.pop());
    return s;
}

inline ArrivalStream gen_quasi_periodic(double rate, double jitter_fraction, double duration,
                                        std::uint64_t seed, double phase_fraction = 0.0) {
    ArrivalStream s;
    ArrivalGen g = ArrivalGen::quasi_periodic(rate, jitter_fraction, seed, phase_fraction);
    while (g.peek() < duration) s.instants.push_back(g.pop());
    // jitter below 0.5 of the interval cannot reorder instants, but keep the
    // contract explicit
    std::sort(s.instants.begin(), s.instants.end());
    return s;
}

// Debug/replay export: one `device_id,timestamp` row per arrival.
inline void write_streams_csv(std::ostream& os, std::span<const ArrivalStream> streams) {
    os << "device_id,timestamp\n";
    char buf[64];
    for (const auto& s : streams)
        for (double t : s.instants) {
            std::snprintf(buf, sizeof buf, "%d,%.9f\n", s.device_id, t);
            os << buf;
        }
}

} // namespace msmac
