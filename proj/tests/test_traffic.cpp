#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "msmac/traffic.hpp"

using namespace msmac;

TEST_CASE("zero rate yields an empty stream") {
    auto s = gen_poisson(0.0, 100.0, 42);
    REQUIRE(s.instants.empty());
}

TEST_CASE("poisson count stays within 3 sigma of the mean") {
    // rate 3 over 2000 s: mean 6000, sigma ~77.5
    for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 1234ULL, 99999ULL}) {
        auto s = gen_poisson(3.0, 2000.0, seed);
        REQUIRE(s.instants.size() >= 5768);
        REQUIRE(s.instants.size() <= 6232);
    }
}

TEST_CASE("poisson streams are deterministic and strictly increasing") {
    auto a = gen_poisson(5.0, 500.0, 77);
    auto b = gen_poisson(5.0, 500.0, 77);
    REQUIRE(a.instants == b.instants);
    for (size_t i = 1; i < a.instants.size(); ++i) REQUIRE(a.instants[i] > a.instants[i - 1]);
    REQUIRE(a.instants.front() >= 0.0);
    REQUIRE(a.instants.back() < 500.0);
}

TEST_CASE("quasi-periodic without jitter is a pure grid") {
    auto s = gen_quasi_periodic(2.0, 0.0, 2.0, 5);
    REQUIRE(s.instants.size() == 3);
    REQUIRE(s.instants[0] == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(s.instants[1] == Catch::Approx(1.0).margin(1e-15));
    REQUIRE(s.instants[2] == Catch::Approx(1.5).margin(1e-15));
}

TEST_CASE("quasi-periodic gaps stay within the jitter bound") {
    auto s = gen_quasi_periodic(1.0, 0.05, 3000.0, 11);
    for (size_t i = 1; i < s.instants.size(); ++i) {
        const double gap = s.instants[i] - s.instants[i - 1];
        REQUIRE(gap >= 0.90);
        REQUIRE(gap <= 1.10);
    }
}

TEST_CASE("quasi-periodic count is floor-determined within one") {
    for (std::uint64_t seed : {3ULL, 17ULL, 2222ULL}) {
        auto s = gen_quasi_periodic(5.0, 0.05, 2000.0, seed);
        REQUIRE(s.instants.size() >= 9999);
        REQUIRE(s.instants.size() <= 10001);
    }
}

TEST_CASE("poisson empirical mean inter-arrival converges to 1/rate") {
    auto s = gen_poisson(50.0, 4000.0, 31);  // ~2e5 arrivals
    REQUIRE(s.instants.size() >= 100000);
    const double mean = s.instants.back() / static_cast<double>(s.instants.size() - 1);
    REQUIRE(mean == Catch::Approx(1.0 / 50.0).epsilon(0.02));
}

TEST_CASE("per-device stream seeds are independent of the device set") {
    REQUIRE(stream_seed(9, 1) != stream_seed(9, 2));
    REQUIRE(stream_seed(9, 1) == stream_seed(9, 1));
    REQUIRE(stream_seed(9, 1) != stream_seed(10, 1));
}

TEST_CASE("lazy generator matches the materialized stream") {
    const std::uint64_t seed = 404;
    auto s = gen_quasi_periodic(3.0, 0.05, 50.0, seed, 0.25);
    ArrivalGen g = ArrivalGen::quasi_periodic(3.0, 0.05, seed, 0.25);
    for (double t : s.instants) REQUIRE(g.pop() == t);

    auto sp = gen_poisson(2.0, 50.0, seed);
    ArrivalGen gp = ArrivalGen::poisson(2.0, seed);
    for (double t : sp.instants) REQUIRE(gp.pop() == t);
}

TEST_CASE("stream export uses device_id,timestamp rows") {
    ArrivalStream s;
    s.device_id = 4;
    s.instants = {0.5, 1.25};
    std::ostringstream os;
    write_streams_csv(os, std::span<const ArrivalStream>(&s, 1));
    REQUIRE(os.str() == "device_id,timestamp\n4,0.500000000\n4,1.250000000\n");
}
