#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msmac/core.hpp"
#include "msmac/nn.hpp"
#include "msmac/sim.hpp"
#include "msmac/surrogate.hpp"

namespace msmac {

inline constexpr int kSchemaVersion = 1;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaVersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

namespace detail {

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw IoError("parse error in " + path.string() + ": " + e.what());
    }
    return j;
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

inline void check_version(const json& j, const std::string& what) {
    if (!j.contains("version") || !j["version"].is_number_integer())
        throw SchemaVersionError(what + ": missing schema version");
    if (j["version"].get<int>() != kSchemaVersion)
        throw SchemaVersionError(what + ": unsupported schema version " +
                                 j["version"].dump());
}

} // namespace detail

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

struct Scenario {
    std::vector<DeviceProfile> devices;
    ProtocolParams params;
    QosSpec qos;
    GuardMargins guards;

    bool operator==(const Scenario& o) const {
        if (devices.size() != o.devices.size()) return false;
        for (size_t i = 0; i < devices.size(); ++i) {
            const auto &a = devices[i], &b = o.devices[i];
            if (a.id != b.id || a.cls != b.cls || a.rate != b.rate ||
                a.pattern != b.pattern || a.jitter != b.jitter)
                return false;
        }
        auto eq3 = [](const ClassTriple<double>& x, const ClassTriple<double>& y) {
            return x.hp == y.hp && x.rp == y.rp && x.lp == y.lp;
        };
        return params.n_m == o.params.n_m && params.r_h == o.params.r_h &&
               params.r_r == o.params.r_r && params.r_l == o.params.r_l &&
               params.t_m == o.params.t_m && params.t_x == o.params.t_x &&
               eq3(qos.delta, o.qos.delta) && eq3(qos.rho, o.qos.rho) &&
               eq3(guards.g, o.guards.g);
    }
};

inline json to_json(const ProtocolParams& p) {
    return json{{"n_m", p.n_m}, {"r_h", p.r_h}, {"r_r", p.r_r},
                {"r_l", p.r_l}, {"t_m", p.t_m}, {"t_x", p.t_x}};
}

inline ProtocolParams params_from_json(const json& j) {
    ProtocolParams p;
    p.n_m = j.at("n_m").get<int>();
    p.r_h = j.at("r_h").get<int>();
    p.r_r = j.at("r_r").get<int>();
    p.r_l = j.at("r_l").get<int>();
    p.t_m = j.at("t_m").get<double>();
    p.t_x = j.at("t_x").get<double>();
    return p;
}

inline json to_json(const QosSpec& q) {
    return json{{"delta", {q.delta.hp, q.delta.rp, q.delta.lp}},
                {"rho", {q.rho.hp, q.rho.rp, q.rho.lp}}};
}

inline QosSpec qos_from_json(const json& j) {
    QosSpec q;
    const auto& d = j.at("delta");
    const auto& r = j.at("rho");
    q.delta = {d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>()};
    q.rho = {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()};
    return q;
}

inline void save_scenario(const std::filesystem::path& path, const Scenario& s) {
    json devs = json::array();
    for (const auto& d : s.devices)
        devs.push_back({{"id", d.id},
                        {"class", to_string(d.cls)},
                        {"rate", d.rate},
                        {"pattern", d.pattern == ArrivalPattern::Poisson ? "poisson" : "quasi_periodic"},
                        {"jitter", d.jitter}});
    json j{{"version", kSchemaVersion},
           {"devices", devs},
           {"params", to_json(s.params)},
           {"qos", to_json(s.qos)},
           {"guards", {s.guards.g.hp, s.guards.g.rp, s.guards.g.lp}}};
    detail::write_json(path, j);
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    json j = detail::read_json(path);
    detail::check_version(j, "scenario");
    Scenario s;
    for (const auto& d : j.at("devices")) {
        DeviceProfile p;
        p.id = d.at("id").get<int>();
        p.cls = class_from_string(d.at("class").get<std::string>());
        p.rate = d.at("rate").get<double>();
        p.pattern = d.at("pattern").get<std::string>() == "poisson"
                        ? ArrivalPattern::Poisson
                        : ArrivalPattern::QuasiPeriodic;
        p.jitter = d.at("jitter").get<double>();
        s.devices.push_back(p);
    }
    s.params = params_from_json(j.at("params"));
    s.qos = qos_from_json(j.at("qos"));
    if (j.contains("guards")) {
        const auto& g = j["guards"];
        s.guards.g = {g.at(0).get<double>(), g.at(1).get<double>(), g.at(2).get<double>()};
    }
    return s;
}

// Content hash, invariant to device ordering: devices are folded in id order.
inline std::uint64_t scenario_hash(const Scenario& s) {
    auto sorted = s.devices;
    std::sort(sorted.begin(), sorted.end(),
              [](const DeviceProfile& a, const DeviceProfile& b) { return a.id < b.id; });
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto fold = [&h](std::uint64_t v) {
        h ^= v;
        h *= 0x100000001b3ULL;
    };
    auto fold_double = [&](double v) {
        std::uint64_t bits;
        static_assert(sizeof bits == sizeof v);
        std::memcpy(&bits, &v, sizeof bits);
        fold(bits);
    };
    for (const auto& d : sorted) {
        fold(static_cast<std::uint64_t>(d.id));
        fold(static_cast<std::uint64_t>(d.cls));
        fold_double(d.rate);
        fold(static_cast<std::uint64_t>(d.pattern));
        fold_double(d.jitter);
    }
    fold(static_cast<std::uint64_t>(s.params.n_m));
    fold(static_cast<std::uint64_t>(s.params.r_h));
    fold(static_cast<std::uint64_t>(s.params.r_r));
    fold(static_cast<std::uint64_t>(s.params.r_l));
    fold_double(s.params.t_m);
    fold_double(s.params.t_x);
    for (double v : {s.qos.delta.hp, s.qos.delta.rp, s.qos.delta.lp, s.qos.rho.hp,
                     s.qos.rho.rp, s.qos.rho.lp})
        fold_double(v);
    return h;
}

// ---------------------------------------------------------------------------
// Assignment
// ---------------------------------------------------------------------------

inline void save_assignment(const std::filesystem::path& dir, const Scenario& s,
                            const Assignment& a, const std::vector<double>& est_delay = {},
                            const std::vector<double>& est_collision = {}) {
    json anchors = json::array();
    for (size_t i = 0; i < a.anchor.size(); ++i) {
        json row{{"device_id", s.devices[i].id},
                 {"slot", a.anchor[i].slot},
                 {"mini", a.anchor[i].mini}};
        if (!est_delay.empty()) row["est_delay"] = est_delay[i];
        if (!est_collision.empty()) row["est_collision"] = est_collision[i];
        anchors.push_back(row);
    }
    json j{{"version", kSchemaVersion},
           {"success", a.success},
           {"assigned_count", a.assigned_count},
           {"fail_device", a.fail_device},
           {"anchors", anchors}};
    detail::write_json(dir / "assignment.json", j);

    std::ofstream csv(dir / "assignment.csv");
    csv << "device_id,class,slot,mini_slot\n";
    for (size_t i = 0; i < a.anchor.size(); ++i)
        csv << s.devices[i].id << ',' << to_string(s.devices[i].cls) << ','
            << a.anchor[i].slot << ',' << a.anchor[i].mini << "\n";
}

inline Assignment load_assignment(const std::filesystem::path& dir) {
    json j = detail::read_json(dir / "assignment.json");
    detail::check_version(j, "assignment");
    Assignment a;
    a.success = j.at("success").get<bool>();
    a.assigned_count = j.at("assigned_count").get<int>();
    a.fail_device = j.at("fail_device").get<int>();
    for (const auto& row : j.at("anchors"))
        a.anchor.push_back(Anchor{row.at("slot").get<int>(), row.at("mini").get<int>()});
    return a;
}

// ---------------------------------------------------------------------------
// Performance report
// ---------------------------------------------------------------------------

inline void save_report(const std::filesystem::path& dir, const PerfReport& r) {
    json devs = json::array();
    for (const auto& d : r.dev)
        devs.push_back({{"id", d.id},
                        {"class", to_string(d.cls)},
                        {"mean_delay_s", d.mean_delay},
                        {"max_delay_s", d.max_delay},
                        {"collision_prob", d.collision_prob},
                        {"generated", d.generated},
                        {"delivered", d.delivered},
                        {"collided", d.collided},
                        {"dropped", d.dropped},
                        {"queued_end", d.queued_end},
                        {"qos_met", d.qos_met}});
    auto agg = [](const ClassAgg& a) {
        return json{{"devices", a.devices},
                    {"mean_delay_s", a.mean_delay},
                    {"max_delay_s", a.max_delay},
                    {"mean_collision", a.mean_collision},
                    {"max_collision", a.max_collision},
                    {"generated", a.generated},
                    {"delivered", a.delivered},
                    {"collided", a.collided},
                    {"dropped", a.dropped},
                    {"qos_met", a.qos_met}};
    };
    json j{{"version", kSchemaVersion},
           {"sim_time_s", r.sim_time},
           {"cycles", r.cycles},
           {"mean_cycle_s", r.mean_cycle_s},
           {"devices", devs},
           {"classes", {{"HP", agg(r.cls.hp)}, {"RP", agg(r.cls.rp)}, {"LP", agg(r.cls.lp)}}}};
    detail::write_json(dir / "report.json", j);

    std::ofstream csv(dir / "report.csv");
    csv << "device_id,class,mean_delay_s,max_delay_s,collision_prob,generated,delivered,"
           "collided,dropped\n";
    char buf[256];
    for (const auto& d : r.dev) {
        std::snprintf(buf, sizeof buf, "%d,%s,%.9g,%.9g,%.9g,%ld,%ld,%ld,%ld\n", d.id,
                      to_string(d.cls), d.mean_delay, d.max_delay, d.collision_prob,
                      d.generated, d.delivered, d.collided, d.dropped);
        csv << buf;
    }
}

inline PerfReport load_report(const std::filesystem::path& dir) {
    json j = detail::read_json(dir / "report.json");
    detail::check_version(j, "report");
    PerfReport r;
    r.sim_time = j.at("sim_time_s").get<double>();
    r.cycles = j.at("cycles").get<long>();
    r.mean_cycle_s = j.at("mean_cycle_s").get<double>();
    for (const auto& d : j.at("devices")) {
        DeviceStats s;
        s.id = d.at("id").get<int>();
        s.cls = class_from_string(d.at("class").get<std::string>());
        s.mean_delay = d.at("mean_delay_s").get<double>();
        s.max_delay = d.at("max_delay_s").get<double>();
        s.collision_prob = d.at("collision_prob").get<double>();
        s.generated = d.at("generated").get<long>();
        s.delivered = d.at("delivered").get<long>();
        s.collided = d.at("collided").get<long>();
        s.dropped = d.at("dropped").get<long>();
        s.queued_end = d.at("queued_end").get<long>();
        s.qos_met = d.at("qos_met").get<bool>();
        r.dev.push_back(s);
    }
    auto agg = [](const json& a) {
        ClassAgg c;
        c.devices = a.at("devices").get<int>();
        c.mean_delay = a.at("mean_delay_s").get<double>();
        c.max_delay = a.at("max_delay_s").get<double>();
        c.mean_collision = a.at("mean_collision").get<double>();
        c.max_collision = a.at("max_collision").get<double>();
        c.generated = a.at("generated").get<long>();
        c.delivered = a.at("delivered").get<long>();
        c.collided = a.at("collided").get<long>();
        c.dropped = a.at("dropped").get<long>();
        c.qos_met = a.at("qos_met").get<bool>();
        return c;
    };
    r.cls.hp = agg(j.at("classes").at("HP"));
    r.cls.rp = agg(j.at("classes").at("RP"));
    r.cls.lp = agg(j.at("classes").at("LP"));
    return r;
}

// ---------------------------------------------------------------------------
// Dataset: one entry per line, `features...;labels...`, headed by the column
// names.
// ---------------------------------------------------------------------------

inline void save_dataset(const std::filesystem::path& path,
                         const std::vector<DatasetEntry>& data, int intervals) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "# version " << kSchemaVersion << "\n";
    std::ostringstream head;
    for (const char* cls : {"hp", "rp", "lp"})
        for (int i = 0; i < intervals; ++i) head << "c_" << cls << '_' << i << ',';
    head << "n_m,r_h,r_r,r_l;";
    const auto& names = label_names();
    for (size_t i = 0; i < names.size(); ++i) head << names[i] << (i + 1 < names.size() ? "," : "");
    out << head.str() << "\n";
    char buf[64];
    for (const auto& e : data) {
        for (size_t i = 0; i < e.features.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9g", e.features[i]);
            out << buf << (i + 1 < e.features.size() ? "," : ";");
        }
        for (size_t i = 0; i < e.labels.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", e.labels[i]);
            out << buf << (i + 1 < e.labels.size() ? "," : "");
        }
        out << "\n";
    }
}

inline std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# version ", 0) != 0)
        throw SchemaVersionError("dataset: missing version line");
    if (std::stoi(line.substr(10)) != kSchemaVersion)
        throw SchemaVersionError("dataset: unsupported schema version");
    std::getline(in, line);  // header
    std::vector<DatasetEntry> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto semi = line.find(';');
        if (semi == std::string::npos) throw IoError("dataset: malformed line");
        DatasetEntry e;
        std::stringstream fs(line.substr(0, semi)), ls(line.substr(semi + 1));
        std::string tok;
        while (std::getline(fs, tok, ',')) e.features.push_back(std::stod(tok));
        size_t k = 0;
        while (std::getline(ls, tok, ',') && k < 13) e.labels[k++] = std::stod(tok);
        if (k != 13) throw IoError("dataset: expected 13 labels");
        out.push_back(std::move(e));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model container: spec, parameters, normalizers, and the training manifest.
// ---------------------------------------------------------------------------

inline void save_model(const std::filesystem::path& path, const TrainedModel& tm,
                       const json& manifest = json::object()) {
    json layers = json::array();
    for (const auto& l : tm.net.spec().layers)
        layers.push_back({{"width", l.width},
                          {"act", l.act == Act::Elu ? "elu" : "relu"},
                          {"dropout", l.dropout}});
    json theta = json::array();
    for (const auto& v : tm.net.layer_views())
        theta.push_back({{"w", *v.w}, {"b", *v.b}});
    json history = json::array();
    for (const auto& h : tm.history)
        history.push_back(
            {{"train_loss", h.train_loss}, {"val_loss", h.val_loss}, {"val_r2", h.val_r2}});
    json j{{"version", kSchemaVersion},
           {"spec", {{"input_width", tm.net.spec().input_width}, {"layers", layers}}},
           {"theta", theta},
           {"feature_norm", {{"mean", tm.feature_norm.mean}, {"stddev", tm.feature_norm.stddev}}},
           {"label_scale", {{"lo", tm.label_scale.lo}, {"hi", tm.label_scale.hi}}},
           {"metrics",
            {{"test_r2_printed", tm.test_r2_printed},
             {"test_r2_conventional", tm.test_r2_conventional},
             {"test_bit_accuracy", tm.test_bit_accuracy},
             {"final_train_loss_eval", tm.final_train_loss_eval},
             {"final_val_loss", tm.final_val_loss}}},
           {"history", history},
           {"manifest", manifest}};
    detail::write_json(path, j);
}

inline TrainedModel load_model(const std::filesystem::path& path) {
    json j = detail::read_json(path);
    detail::check_version(j, "model");
    RegressorSpec spec;
    spec.input_width = j.at("spec").at("input_width").get<int>();
    for (const auto& l : j.at("spec").at("layers"))
        spec.layers.push_back({l.at("width").get<int>(),
                               l.at("act").get<std::string>() == "elu" ? Act::Elu : Act::Relu,
                               l.at("dropout").get<double>()});
    TrainedModel tm;
    tm.net = Mlp(spec, 0);
    const auto& theta = j.at("theta");
    for (size_t li = 0; li < theta.size(); ++li)
        tm.net.set_layer_params(li, theta[li].at("w").get<std::vector<double>>(),
                                theta[li].at("b").get<std::vector<double>>());
    tm.feature_norm.mean = j.at("feature_norm").at("mean").get<std::vector<double>>();
    tm.feature_norm.stddev = j.at("feature_norm").at("stddev").get<std::vector<double>>();
    tm.label_scale.lo = j.at("label_scale").at("lo").get<std::vector<double>>();
    tm.label_scale.hi = j.at("label_scale").at("hi").get<std::vector<double>>();
    const auto& m = j.at("metrics");
    tm.test_r2_printed = m.at("test_r2_printed").get<double>();
    tm.test_r2_conventional = m.at("test_r2_conventional").get<double>();
    tm.test_bit_accuracy = m.at("test_bit_accuracy").get<double>();
    tm.final_train_loss_eval = m.at("final_train_loss_eval").get<double>();
    tm.final_val_loss = m.at("final_val_loss").get<double>();
    for (const auto& h : j.at("history"))
        tm.history.push_back({h.at("train_loss").get<double>(), h.at("val_loss").get<double>(),
                              h.at("val_r2").get<double>()});
    return tm;
}

// ---------------------------------------------------------------------------
// Run directory and manifest
// ---------------------------------------------------------------------------

struct RunManifest {
    std::uint64_t scenario_hash = 0;
    std::uint64_t seed = 0;
    std::string command;
    std::string tool_version = "msmac 0.1.0";
    double wall_clock_s = 0;
    json options = json::object();
};

inline void save_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    json j{{"version", kSchemaVersion},
           {"scenario_hash", m.scenario_hash},
           {"seed", m.seed},
           {"command", m.command},
           {"tool_version", m.tool_version},
           {"wall_clock_s", m.wall_clock_s},
           {"options", m.options}};
    detail::write_json(dir / "manifest.json", j);
}

inline RunManifest load_manifest(const std::filesystem::path& dir) {
    json j = detail::read_json(dir / "manifest.json");
    detail::check_version(j, "manifest");
    RunManifest m;
    m.scenario_hash = j.at("scenario_hash").get<std::uint64_t>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.wall_clock_s = j.at("wall_clock_s").get<double>();
    m.options = j.at("options");
    return m;
}

} // namespace msmac
