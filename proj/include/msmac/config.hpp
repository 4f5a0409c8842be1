#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "msmac/core.hpp"
#include "msmac/datastore.hpp"
#include "msmac/rng.hpp"
#include "msmac/sim.hpp"
#include "msmac/surrogate.hpp"

namespace msmac {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Run configuration: sections {devices, params, qos, sim, train, dataset,
// select}. Devices come either inline or from a generator block.
struct Config {
    std::uint64_t seed = 1;
    std::vector<DeviceProfile> devices;
    ProtocolParams params;
    QosSpec qos;
    GuardMargins guards;
    SimOptions sim;
    bool has_params = false;

    TrainConfig train;
    int intervals = 16;
    double rate_min = 1.0, rate_max = 5.0;

    std::optional<SamplerConfig> sampler;
    std::vector<ProtocolParams> grid;
    int sims_per_entry = 1;

    std::vector<ProtocolParams> candidates;
    std::string model_path;
    std::string dataset_path;
};

namespace detail {

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.contains(key)) throw ConfigError("missing config key: " + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for config key '" + key + "': " + e.what());
    }
}

inline ProtocolParams parse_params(const json& j) {
    ProtocolParams p;
    p.n_m = require<int>(j, "n_m");
    p.r_h = require<int>(j, "r_h");
    p.r_r = require<int>(j, "r_r");
    p.r_l = require<int>(j, "r_l");
    p.t_m = j.value("t_m", 9e-6);
    p.t_x = j.value("t_x", 133e-6);
    return p;
}

inline std::vector<DeviceProfile> generate_devices(const json& g, std::uint64_t seed) {
    const int nh = require<int>(g, "hp");
    const int nr = require<int>(g, "rp");
    const int nl = require<int>(g, "lp");
    const double lo = g.value("rate_min", 1.0), hi = g.value("rate_max", 5.0);
    const double qpf = g.value("qp_fraction", 0.5);
    const double jit = g.value("qp_jitter", 0.05);
    SplitMix64 rng(seed);
    std::vector<DeviceProfile> devs;
    int id = 1;
    auto add = [&](PriorityClass c, int n) {
        for (int i = 0; i < n; ++i) {
            const bool qp = rng.u01() < qpf;
            devs.push_back({id++, c, rng.uniform(lo, hi),
                            qp ? ArrivalPattern::QuasiPeriodic : ArrivalPattern::Poisson,
                            qp ? jit : 0.0});
        }
    };
    add(PriorityClass::HP, nh);
    add(PriorityClass::RP, nr);
    add(PriorityClass::LP, nl);
    return devs;
}

} // namespace detail

inline Config parse_config(const std::filesystem::path& path, std::uint64_t seed_override = 0) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        // nlohmann reports the absolute byte offset; recover line/column
        std::ifstream again(path);
        std::string text((std::istreambuf_iterator<char>(again)),
                         std::istreambuf_iterator<char>());
        size_t line = 1, col = 1;
        for (size_t i = 0; i < std::min(text.size(), e.byte); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                          std::to_string(col) + ": " + e.what());
    }

    Config c;
    c.seed = j.value("seed", 1ULL);
    if (seed_override != 0) c.seed = seed_override;

    if (j.contains("params")) {
        c.params = detail::parse_params(j["params"]);
        c.has_params = true;
    }
    if (j.contains("qos")) {
        const auto& q = j["qos"];
        const auto d = detail::require<std::vector<double>>(q, "delta");
        const auto r = detail::require<std::vector<double>>(q, "rho");
        if (d.size() != 3 || r.size() != 3)
            throw ConfigError("qos.delta and qos.rho need exactly 3 entries (HP, RP, LP)");
        c.qos.delta = {d[0], d[1], d[2]};
        c.qos.rho = {r[0], r[1], r[2]};
    }
    if (j.contains("guards")) {
        const auto g = j["guards"].get<std::vector<double>>();
        if (g.size() != 3) throw ConfigError("guards needs exactly 3 entries");
        c.guards.g = {g[0], g[1], g[2]};
    }
    if (j.contains("devices")) {
        const auto& d = j["devices"];
        if (d.contains("inline")) {
            for (const auto& row : d["inline"]) {
                DeviceProfile p;
                p.id = detail::require<int>(row, "id");
                p.cls = class_from_string(detail::require<std::string>(row, "class"));
                p.rate = detail::require<double>(row, "rate");
                const std::string pat = row.value("pattern", "poisson");
                p.pattern = pat == "poisson" ? ArrivalPattern::Poisson
                                             : ArrivalPattern::QuasiPeriodic;
                p.jitter = row.value("jitter", 0.0);
                c.devices.push_back(p);
            }
        } else if (d.contains("generator")) {
            c.devices = detail::generate_devices(d["generator"], c.seed);
        } else {
            throw ConfigError("devices section needs either 'inline' or 'generator'");
        }
    }
    if (j.contains("sim")) {
        const auto& s = j["sim"];
        c.sim.duration = s.value("duration", 0.0);
        c.sim.warmup = s.value("warmup", -1.0);
        c.sim.buffer = s.value("buffer", true);
        c.sim.synccs = s.value("synccs", true);
        c.sim.smsa = s.value("smsa", true);
        c.sim.random_phase = s.value("random_phase", true);
        c.sim.max_cycles = s.value("max_cycles", 0L);
    }
    c.sim.seed = c.seed;
    if (j.contains("train")) {
        const auto& t = j["train"];
        c.train.epochs = t.value("epochs", 50);
        c.train.batch = t.value("batch", 128);
        c.train.lr = t.value("lr", 1e-3);
        c.train.beta1 = t.value("beta1", 0.9);
        c.train.beta2 = t.value("beta2", 0.999);
        c.train.seed = c.seed;
        c.intervals = t.value("intervals", 16);
    }
    if (j.contains("dataset")) {
        const auto& d = j["dataset"];
        SamplerConfig sc;
        sc.profiles = detail::require<int>(d, "profiles");
        auto span2 = [&](const char* key, int& lo_out, int& hi_out) {
            if (!d.contains(key)) return;
            const auto v = d.at(key).get<std::vector<int>>();
            if (v.size() != 2) throw ConfigError(std::string("dataset.") + key + " needs [min, max]");
            lo_out = v[0];
            hi_out = v[1];
        };
        span2("hp", sc.hp_min, sc.hp_max);
        span2("rp", sc.rp_min, sc.rp_max);
        span2("lp", sc.lp_min, sc.lp_max);
        sc.rate_lo = d.value("rate_min", 1.0);
        sc.rate_hi = d.value("rate_max", 5.0);
        sc.qp_fraction = d.value("qp_fraction", 0.5);
        sc.sim_duration = d.value("sim_duration", 150.0);
        sc.intervals = c.intervals;
        if (j.contains("qos")) sc.qos = c.qos;
        if (j.contains("guards")) sc.guards = c.guards;
        c.sampler = sc;
        c.rate_min = sc.rate_lo;
        c.rate_max = sc.rate_hi;
        if (!d.contains("grid")) throw ConfigError("missing config key: dataset.grid");
        for (const auto& g : d["grid"]) c.grid.push_back(detail::parse_params(g));
        c.sims_per_entry = d.value("sims_per_entry", 1);
    }
    if (j.contains("select")) {
        const auto& s = j["select"];
        c.model_path = detail::require<std::string>(s, "model");
        if (!s.contains("candidates")) throw ConfigError("missing config key: select.candidates");
        for (const auto& g : s["candidates"]) c.candidates.push_back(detail::parse_params(g));
        c.rate_min = s.value("rate_min", c.rate_min);
        c.rate_max = s.value("rate_max", c.rate_max);
    }
    if (j.contains("model")) c.model_path = j["model"].get<std::string>();
    if (j.contains("dataset_path")) c.dataset_path = j["dataset_path"].get<std::string>();
    return c;
}

} // namespace msmac
