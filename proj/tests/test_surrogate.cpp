#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include "msmac/rng.hpp"
#include "msmac/surrogate.hpp"

using namespace msmac;

namespace {

std::vector<DeviceProfile> vb_profile(std::uint64_t seed) {
    SplitMix64 rng(seed);
    std::vector<DeviceProfile> devs;
    for (int i = 1; i <= 1000; ++i) {
        const PriorityClass c = i <= 50   ? PriorityClass::HP
                                : i <= 500 ? PriorityClass::RP
                                           : PriorityClass::LP;
        devs.push_back({i, c, rng.uniform(1.0, 5.0), ArrivalPattern::Poisson, 0.0});
    }
    return devs;
}

} // namespace

TEST_CASE("a device at the lower bound lands in the first bin") {
    std::vector<DeviceProfile> devs = {
        {1, PriorityClass::HP, 1.0, ArrivalPattern::Poisson, 0.0}};
    auto e = encode_profile(devs, 16, 1.0, 5.0);
    REQUIRE(e.c_h[0] == 1.0);
    for (int i = 1; i < 16; ++i) REQUIRE(e.c_h[i] == 0.0);
}

TEST_CASE("one interval counts class sizes") {
    auto devs = vb_profile(3);
    auto e = encode_profile(devs, 1, 1.0, 5.0);
    REQUIRE(e.c_h[0] == 50.0);
    REQUIRE(e.c_r[0] == 450.0);
    REQUIRE(e.c_l[0] == 500.0);
}

TEST_CASE("histogram totals match an independent recount") {
    auto devs = vb_profile(9);
    auto e = encode_profile(devs, 16, 1.0, 5.0);
    double h = 0, r = 0, l = 0;
    for (int i = 0; i < 16; ++i) {
        h += e.c_h[i];
        r += e.c_r[i];
        l += e.c_l[i];
    }
    int nh = 0, nr = 0, nl = 0;
    for (const auto& d : devs) {
        if (d.cls == PriorityClass::HP) ++nh;
        else if (d.cls == PriorityClass::RP) ++nr;
        else ++nl;
    }
    REQUIRE(h == nh);
    REQUIRE(r == nr);
    REQUIRE(l == nl);
    // the rate at the upper bound falls in the last (right-closed) bin
    std::vector<DeviceProfile> edge = {{1, PriorityClass::LP, 5.0, ArrivalPattern::Poisson, 0.0}};
    REQUIRE(encode_profile(edge, 16, 1.0, 5.0).c_l[15] == 1.0);
}

TEST_CASE("encoding is invariant to device order within a class") {
    auto devs = vb_profile(21);
    auto shuffled = devs;
    SplitMix64 rng(4);
    for (size_t i = shuffled.size(); i > 1; --i)
        std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    auto a = encode_profile(devs, 16, 1.0, 5.0);
    auto b = encode_profile(shuffled, 16, 1.0, 5.0);
    REQUIRE(a.c_h == b.c_h);
    REQUIRE(a.c_r == b.c_r);
    REQUIRE(a.c_l == b.c_l);
}

TEST_CASE("rates outside the encoding range are an error") {
    std::vector<DeviceProfile> devs = {
        {1, PriorityClass::HP, 9.0, ArrivalPattern::Poisson, 0.0}};
    REQUIRE_THROWS_AS(encode_profile(devs, 16, 1.0, 5.0), RangeError);
}

TEST_CASE("feature vector layout is 3I + 4") {
    auto devs = vb_profile(5);
    auto e = encode_profile(devs, 16, 1.0, 5.0);
    ProtocolParams p{8, 5, 45, 270, 9e-6, 133e-6};
    auto f = encode_features(e, p);
    REQUIRE(f.size() == 52);
    REQUIRE(f[48] == 8);
    REQUIRE(f[49] == 5);
    REQUIRE(f[50] == 45);
    REQUIRE(f[51] == 270);
}

TEST_CASE("dataset size is profiles x grid and labels are sane") {
    SamplerConfig sc;
    sc.profiles = 6;
    sc.hp_min = 2; sc.hp_max = 4;
    sc.rp_min = 4; sc.rp_max = 10;
    sc.lp_min = 4; sc.lp_max = 10;
    sc.sim_duration = 20.0;
    std::vector<ProtocolParams> grid = {{4, 5, 15, 45, 9e-6, 133e-6},
                                        {8, 5, 45, 45, 9e-6, 133e-6}};
    auto data = generate_dataset(sc, grid, 1, 77, 2);
    REQUIRE(data.size() == 12);
    for (const auto& e : data) {
        REQUIRE(e.features.size() == 52);
        REQUIRE((e.labels[kIndicationBit] == 0.0 || e.labels[kIndicationBit] == 1.0));
        for (int k = 0; k < 12; ++k) REQUIRE(e.labels[k] >= 0.0);
        for (int k = kHpMaxColl; k <= kLpMeanColl; ++k) REQUIRE(e.labels[k] <= 1.0);
    }
    // deterministic regardless of worker count
    auto again = generate_dataset(sc, grid, 1, 77, 1);
    REQUIRE(again.size() == data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        REQUIRE(data[i].features == again[i].features);
        REQUIRE(data[i].labels == again[i].labels);
    }
}

TEST_CASE("an impossible delay bound yields indication bit 1") {
    SamplerConfig sc;
    sc.profiles = 1;
    sc.hp_min = sc.hp_max = 3;
    sc.rp_min = sc.rp_max = 3;
    sc.lp_min = sc.lp_max = 3;
    sc.qos.delta.hp = 1e-7;  // below the minimum slot time
    std::vector<ProtocolParams> grid = {{4, 5, 15, 45, 9e-6, 133e-6}};
    auto data = generate_dataset(sc, grid, 1, 5, 1);
    REQUIRE(data.size() == 1);
    REQUIRE(data[0].labels[kIndicationBit] == 1.0);
}

TEST_CASE("select_params rejects invalid candidates before the model") {
    // trained stub: tiny deterministic net on a tiny dataset
    SamplerConfig sc;
    sc.profiles = 24;
    sc.hp_min = 2; sc.hp_max = 4;
    sc.rp_min = 4; sc.rp_max = 8;
    sc.lp_min = 4; sc.lp_max = 8;
    sc.sim_duration = 10.0;
    std::vector<ProtocolParams> grid = {{4, 5, 15, 45, 9e-6, 133e-6},
                                        {8, 5, 45, 45, 9e-6, 133e-6}};
    auto data = generate_dataset(sc, grid, 1, 11, 2);
    RegressorSpec spec;
    spec.input_width = 52;
    spec.layers = {{24, Act::Elu, 0.0}, {13, Act::Relu, 0.0}};
    TrainConfig cfg;
    cfg.batch = 16;
    cfg.epochs = 8;
    auto tm = train(spec, data, cfg);

    SplitMix64 rng(31);
    std::vector<DeviceProfile> profile;
    int id = 1;
    for (int i = 0; i < 3; ++i)
        profile.push_back({id++, PriorityClass::HP, rng.uniform(1.0, 5.0), ArrivalPattern::Poisson, 0.0});
    for (int i = 0; i < 6; ++i)
        profile.push_back({id++, PriorityClass::RP, rng.uniform(1.0, 5.0), ArrivalPattern::Poisson, 0.0});
    for (int i = 0; i < 6; ++i)
        profile.push_back({id++, PriorityClass::LP, rng.uniform(1.0, 5.0), ArrivalPattern::Poisson, 0.0});

    QosSpec loose;
    loose.delta = {1.0, 1.0, 1.0};
    loose.rho = {1.0, 1.0, 1.0};
    std::vector<ProtocolParams> cands = {
        {4, 5, 7, 14, 9e-6, 133e-6},   // violates divisibility: dropped pre-model
        {4, 5, 15, 45, 9e-6, 133e-6},
    };
    auto ranked = select_params(profile, cands, tm, loose, 16, 1.0, 5.0);
    REQUIRE(ranked.size() == 1);
    REQUIRE(ranked[0].params.r_r == 15);

    // all candidates filtered -> error
    QosSpec impossible;
    impossible.delta = {1e-12, 1e-12, 1e-12};
    impossible.rho = {0.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(select_params(profile, cands, tm, impossible, 16, 1.0, 5.0),
                      NoFeasibleCandidate);
}
