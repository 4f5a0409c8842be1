#pragma once

#include <cmath>
#include <cstdint>

namespace msmac {

// splitmix64: small, fast, and portable. All randomness in the toolkit flows
// through this so that runs are byte-reproducible across builds (the standard
// <random> distributions are implementation-defined).
struct SplitMix64 {
    std::uint64_t state = 0;

    explicit SplitMix64(std::uint64_t seed = 0) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * u01(); }

    // exponential with the given rate (mean 1/rate)
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// Seed derivation: mixing the scenario seed with a stream index gives each
// device (or dataset entry) an independent stream, so adding a device never
// perturbs the others.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 s(seed ^ (0x632be59bd9b4e019ULL * (index + 1)));
    s.next();
    return s.next();
}

} // namespace msmac
