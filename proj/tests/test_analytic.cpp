#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "msmac/analytic.hpp"

using namespace msmac;

TEST_CASE("max_hp_cycle evaluates the floor bound") {
    // floor(2*1ms / (8*9us + 133us)) = floor(2000/205) = 9
    REQUIRE(max_hp_cycle(1e-3, 8, 9e-6, 133e-6) == 9);
    // floor(2*10ms / (10*9us + 133us)) = floor(20000/223) = 89
    REQUIRE(max_hp_cycle(10e-3, 10, 9e-6, 133e-6) == 89);
}

TEST_CASE("max_hp_cycle boundary cases") {
    const double slot = 8 * 9e-6 + 133e-6;
    REQUIRE(max_hp_cycle(slot / 2, 8, 9e-6, 133e-6) == 1);
    REQUIRE(max_hp_cycle(slot / 2 * 0.99, 8, 9e-6, 133e-6) == 0);
}

TEST_CASE("lp_cycle_length matches hand evaluation of the V-B scenario") {
    // 270*8*9us / (1 - 3000*133us) = 19.44ms / 0.601
    const double got = lp_cycle_length(270, 8, 9e-6, 133e-6, 3000.0);
    REQUIRE(got == Catch::Approx(0.01944 / 0.601).epsilon(1e-12));
    REQUIRE(got == Catch::Approx(32.35e-3).epsilon(0.01));
}

TEST_CASE("lp_cycle_length with zero load is the raw mini-slot budget") {
    REQUIRE(lp_cycle_length(270, 8, 9e-6, 133e-6, 0.0) ==
            Catch::Approx(270 * 8 * 9e-6).epsilon(1e-15));
}

TEST_CASE("lp_cycle_length throws on overload") {
    REQUIRE_THROWS_AS(lp_cycle_length(270, 8, 9e-6, 133e-6, 1.0 / 133e-6), OverloadError);
    std::vector<double> rates(1000, 8.0);  // 8000 pkts/s * 133us > 1
    REQUIRE_THROWS_AS(
        lp_cycle_length(270, 8, 9e-6, 133e-6, std::span<const double>(rates)), OverloadError);
}

TEST_CASE("derive_cycles applies the cycle ratios and tau0 = T_f/2") {
    ProtocolParams p{8, 5, 45, 270, 9e-6, 133e-6};
    auto c = derive_cycles(p, 3000.0);
    const double tfl = 0.01944 / 0.601;
    REQUIRE(c.t_f_l == Catch::Approx(tfl).epsilon(1e-12));
    REQUIRE(c.t_f_r == Catch::Approx(tfl * 45.0 / 270.0).epsilon(1e-12));
    REQUIRE(c.t_f_h == Catch::Approx(tfl * 5.0 / 270.0).epsilon(1e-12));
    REQUIRE(c.t_f_r == Catch::Approx(5.392e-3).epsilon(0.01));
    REQUIRE(c.t_f_h == Catch::Approx(0.599e-3).epsilon(0.01));
    REQUIRE(c.tau0_h == Catch::Approx(c.t_f_h / 2).epsilon(1e-15));
    REQUIRE(c.tau0_h == Catch::Approx(0.2996e-3).epsilon(0.01));
    REQUIRE(c.tau0_r == Catch::Approx(c.t_f_r / 2).epsilon(1e-15));
    REQUIRE(c.tau0_l == Catch::Approx(c.t_f_l / 2).epsilon(1e-15));
}

TEST_CASE("derive_cycles with equal cycles collapses to one length") {
    ProtocolParams p{10, 100, 100, 100, 9e-6, 133e-6};
    auto c = derive_cycles(p, 10.0);
    REQUIRE(c.t_f_h == c.t_f_l);
    REQUIRE(c.t_f_r == c.t_f_l);
}

TEST_CASE("derive_cycles handles the (5,35,140) contrast setting") {
    ProtocolParams p{8, 5, 35, 140, 9e-6, 133e-6};
    auto c = derive_cycles(p, 3000.0);
    REQUIRE(c.t_f_l == Catch::Approx(140 * 8 * 9e-6 / 0.601).epsilon(1e-12));
    REQUIRE(c.t_f_l == Catch::Approx(16.77e-3).epsilon(0.01));
}

TEST_CASE("derive_cycles without SyncCS uses full-length slots") {
    ProtocolParams p{10, 100, 100, 100, 9e-6, 133e-6};
    auto c = derive_cycles(p, 42.0, /*synccs=*/false);
    REQUIRE(c.t_f_l == Catch::Approx(100 * (10 * 9e-6 + 133e-6)).epsilon(1e-15));
}

TEST_CASE("adf_estimate anchors and growth") {
    REQUIRE(adf_estimate(0.0) == 1.0);
    REQUIRE(adf_estimate(0.2) == Catch::Approx(std::exp(0.2)).epsilon(1e-15));
    REQUIRE(adf_estimate(1.0) == Catch::Approx(std::exp(1.0)).epsilon(1e-15));
    // strictly increasing
    double prev = adf_estimate(0.0);
    for (double g = 0.05; g < 2.0; g += 0.05) {
        REQUIRE(adf_estimate(g) > prev);
        prev = adf_estimate(g);
    }
}

TEST_CASE("overall_delay arithmetic") {
    REQUIRE(overall_delay(1.0, 0.599e-3, 133e-6, 0.2996e-3) ==
            Catch::Approx(0.4326e-3).epsilon(1e-12));
    REQUIRE(overall_delay(1.0, 1.0, 0.0, 0.0) == 0.0);
    REQUIRE(overall_delay(2.0, 10e-3, 133e-6, 5e-3) == Catch::Approx(15.133e-3).epsilon(1e-12));
}

TEST_CASE("overall_delay is linear in tau with slope t_f") {
    const double t_f = 3.7e-3;
    const double d1 = overall_delay(1.5, t_f, 1e-4, 2e-3);
    const double d2 = overall_delay(2.5, t_f, 1e-4, 2e-3);
    REQUIRE(d2 - d1 == Catch::Approx(t_f).epsilon(1e-12));
}

TEST_CASE("collision_after_add evaluates the update") {
    REQUIRE(collision_after_add(0.0, 10e-3, 5.0, 0) == 0.0);  // first occupant
    REQUIRE(collision_after_add(0.0, 10e-3, 5.0, 1) == Catch::Approx(0.05).epsilon(1e-12));
    REQUIRE(collision_after_add(0.05, 10e-3, 2.0, 1) ==
            Catch::Approx(1.0 - 0.95 * 0.98).epsilon(1e-12));
}

TEST_CASE("collision_after_add is monotone and clamped") {
    double prev = 0;
    for (double q = 0; q <= 1.0; q += 0.1) {
        const double v = collision_after_add(q, 5e-3, 2.0, 2);
        REQUIRE(v >= prev);
        prev = v;
    }
    prev = 0;
    for (double l = 0; l < 10; l += 0.5) {
        const double v = collision_after_add(0.2, 5e-3, l, 2);
        REQUIRE(v >= prev);
        prev = v;
    }
    prev = 0;
    for (double tf = 0; tf < 0.2; tf += 0.01) {
        const double v = collision_after_add(0.2, tf, 2.0, 2);
        REQUIRE(v >= prev);
        prev = v;
    }
    REQUIRE(collision_after_add(0.9999, 1.0, 1e6, 3) == 1.0);
}

TEST_CASE("state_after_add first occupant") {
    MiniSlotState st;
    st.tau = 1.3;
    auto r = state_after_add(st, 7, 2.0, 10e-3);
    REQUIRE(r.state.q_c == 0.0);
    REQUIRE(r.n_c == 1.0);
    REQUIRE(r.state.lambda_agg == Catch::Approx(2.0).epsilon(1e-15));
    REQUIRE(r.state.gamma == Catch::Approx(0.02).epsilon(1e-12));
    REQUIRE(r.state.tau == 1.3);  // unchanged
    REQUIRE(r.state.occupants == std::vector<int>{7});
}

TEST_CASE("state_after_add sharing follows the discounted update") {
    MiniSlotState st;
    st.tau = 1.0;
    st = state_after_add(st, 1, 3.0, 10e-3).state;
    auto r = state_after_add(st, 2, 2.0, 10e-3);
    REQUIRE(r.n_c == Catch::Approx(1.03).epsilon(1e-12));
    REQUIRE(r.state.q_c == Catch::Approx(0.02).epsilon(1e-12));
    const double expect = 3.0 + 2.0 * (1.0 - 0.02 / 1.03);
    REQUIRE(r.state.lambda_agg == Catch::Approx(expect).epsilon(1e-12));
    REQUIRE(r.state.lambda_agg == Catch::Approx(4.9612).epsilon(1e-4));
    REQUIRE(r.state.tau == st.tau);  // tau never changes on same-mini-slot adds
}

TEST_CASE("gamma accumulates the discounted per-cycle arrivals") {
    // After assigning k devices, gamma = T_f * sum of effective rates, where
    // each device's rate is discounted by (1 - q_new/n_c) from the sharing
    // update. Verify against an independent running sum.
    MiniSlotState st;
    st.tau = 1.0;
    const double t_f = 8e-3;
    const double rates[] = {1.0, 2.5, 0.5, 4.0};
    double expected = 0.0;
    for (size_t i = 0; i < 4; ++i) {
        const double q_new =
            collision_after_add(st.q_c, t_f, rates[i], st.occupants.size());
        double n_c = 1.0;
        for (double lj : st.occupant_rates) n_c += st.tau * t_f * lj;
        const double discount = st.occupants.empty() ? 1.0 : (1.0 - q_new / n_c);
        expected += t_f * rates[i] * discount;
        st = state_after_add(st, static_cast<int>(i) + 1, rates[i], t_f).state;
        REQUIRE(st.gamma == Catch::Approx(expected).epsilon(1e-12));
    }
}
