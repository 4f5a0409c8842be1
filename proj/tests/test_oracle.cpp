#include <catch2/catch_amalgamated.hpp>

#include "msmac/oracle.hpp"
#include "msmac/rng.hpp"

using namespace msmac;

namespace {

QosSpec loose_qos() {
    QosSpec q;
    q.delta = {50e-3, 100e-3, 200e-3};
    q.rho = {0.05, 0.10, 0.20};
    return q;
}

} // namespace

TEST_CASE("zero devices form a feasible empty assignment") {
    ProtocolParams p{2, 1, 2, 4, 9e-6, 133e-6};
    auto a = brute_force_assign({}, p, loose_qos());
    REQUIRE(a.has_value());
    REQUIRE(a->success);
    REQUIRE(a->assigned_count == 0);
}

TEST_CASE("two devices in a one-cell space with rho=0 are infeasible") {
    ProtocolParams p{1, 1, 1, 1, 9e-6, 133e-6};
    std::vector<DeviceProfile> devs = {
        {1, PriorityClass::HP, 1.0, ArrivalPattern::Poisson, 0.0},
        {2, PriorityClass::HP, 2.0, ArrivalPattern::Poisson, 0.0},
    };
    QosSpec q = loose_qos();
    q.rho.hp = 0.0;
    auto a = brute_force_assign(devs, p, q);
    REQUIRE_FALSE(a.has_value());
}

TEST_CASE("caps are enforced") {
    ProtocolParams p{4, 1, 2, 4, 9e-6, 133e-6};  // n_m=4 > cap 3
    REQUIRE_THROWS_AS(brute_force_assign({}, p, loose_qos()), CapExceeded);
}

TEST_CASE("greedy success implies the oracle also finds a feasible assignment") {
    SplitMix64 rng(314);
    int checked = 0;
    while (checked < 60) {
        ProtocolParams p;
        p.n_m = 1 + static_cast<int>(rng.below(3));
        p.r_h = 1 + static_cast<int>(rng.below(2));
        p.r_r = p.r_h * (1 + static_cast<int>(rng.below(2)));
        p.r_l = p.r_r * (1 + static_cast<int>(rng.below(2)));
        if (p.r_l > 4) continue;
        p.t_m = 9e-6;
        p.t_x = 133e-6;
        std::vector<DeviceProfile> devs;
        const int n = static_cast<int>(rng.below(7));
        for (int i = 1; i <= n; ++i)
            devs.push_back({i, static_cast<PriorityClass>(rng.below(3)),
                            rng.uniform(0.5, 6.0), ArrivalPattern::Poisson, 0.0});
        QosSpec q;
        q.delta = {rng.uniform(1e-3, 40e-3), rng.uniform(2e-3, 60e-3), rng.uniform(4e-3, 90e-3)};
        q.rho = {rng.uniform(0.0, 0.03), rng.uniform(0.0, 0.08), rng.uniform(0.0, 0.15)};

        auto greedy = overall_assign(devs, p, q);
        std::optional<Assignment> oracle;
        try {
            oracle = brute_force_assign(devs, p, q);
        } catch (const CapExceeded&) {
            continue;
        }
        ++checked;
        if (greedy.assignment.success) {
            INFO("n=" << n << " n_m=" << p.n_m << " r=(" << p.r_h << "," << p.r_r << ","
                      << p.r_l << ")");
            REQUIRE(oracle.has_value());
        }
    }
}
