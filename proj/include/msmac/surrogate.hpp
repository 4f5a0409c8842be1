#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "msmac/assign.hpp"
#include "msmac/core.hpp"
#include "msmac/nn.hpp"
#include "msmac/rng.hpp"
#include "msmac/sim.hpp"

namespace msmac {

struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoFeasibleCandidate : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Profile encoding: per-class histograms of the arrival rates over I equal
// intervals of [lambda_min, lambda_max], last interval right-closed.
// ---------------------------------------------------------------------------

struct ProfileEncoding {
    std::vector<double> c_h, c_r, c_l;
    double lambda_min = 0, lambda_max = 0;
    int intervals = 0;
};

inline ProfileEncoding encode_profile(const std::vector<DeviceProfile>& profiles, int intervals,
                                      double lambda_min, double lambda_max) {
    if (intervals < 1) throw RangeError("interval count must be >= 1");
    ProfileEncoding e;
    e.intervals = intervals;
    e.lambda_min = lambda_min;
    e.lambda_max = lambda_max;
    e.c_h.assign(intervals, 0.0);
    e.c_r.assign(intervals, 0.0);
    e.c_l.assign(intervals, 0.0);
    const double width = (lambda_max - lambda_min) / intervals;
    for (const auto& d : profiles) {
        if (d.rate < lambda_min || d.rate > lambda_max)
            throw RangeError("device " + std::to_string(d.id) + " rate outside encoding range");
        int bin = width > 0 ? static_cast<int>((d.rate - lambda_min) / width) : 0;
        if (bin >= intervals) bin = intervals - 1;  // right-closed last interval
        switch (d.cls) {
            case PriorityClass::HP: e.c_h[bin] += 1; break;
            case PriorityClass::RP: e.c_r[bin] += 1; break;
            case PriorityClass::LP: e.c_l[bin] += 1; break;
        }
    }
    return e;
}

// feature vector: [c_h | c_r | c_l | n_m | r_h | r_r | r_l], width 3I + 4
inline std::vector<double> encode_features(const ProfileEncoding& e, const ProtocolParams& p) {
    std::vector<double> f;
    f.reserve(3 * e.intervals + 4);
    f.insert(f.end(), e.c_h.begin(), e.c_h.end());
    f.insert(f.end(), e.c_r.begin(), e.c_r.end());
    f.insert(f.end(), e.c_l.begin(), e.c_l.end());
    f.push_back(p.n_m);
    f.push_back(p.r_h);
    f.push_back(p.r_r);
    f.push_back(p.r_l);
    return f;
}

// ---------------------------------------------------------------------------
// Normalizers
// ---------------------------------------------------------------------------

// Z-score over the training set, population standard deviation.
// Zero-variance features map to 0.
struct Zscore {
    std::vector<double> mean, stddev;

    static Zscore fit(const std::vector<std::vector<double>>& rows) {
        if (rows.size() < 2) throw RangeError("z-score needs at least 2 rows");
        const size_t w = rows[0].size();
        Zscore z;
        z.mean.assign(w, 0.0);
        z.stddev.assign(w, 0.0);
        for (const auto& r : rows)
            for (size_t j = 0; j < w; ++j) z.mean[j] += r[j];
        for (auto& m : z.mean) m /= static_cast<double>(rows.size());
        for (const auto& r : rows)
            for (size_t j = 0; j < w; ++j) {
                const double d = r[j] - z.mean[j];
                z.stddev[j] += d * d;
            }
        for (auto& s : z.stddev) s = std::sqrt(s / static_cast<double>(rows.size()));
        return z;
    }

    std::vector<double> apply(const std::vector<double>& row) const {
        std::vector<double> out(row.size());
        for (size_t j = 0; j < row.size(); ++j)
            out[j] = stddev[j] > 0 ? (row[j] - mean[j]) / stddev[j] : 0.0;
        return out;
    }
};

// Per-dimension min-max to [0,1], fitted on the training split.
struct MinMaxScaler {
    std::vector<double> lo, hi;

    static MinMaxScaler fit(const std::vector<std::array<double, 13>>& rows) {
        MinMaxScaler s;
        s.lo.assign(13, 1e300);
        s.hi.assign(13, -1e300);
        for (const auto& r : rows)
            for (size_t j = 0; j < 13; ++j) {
                s.lo[j] = std::min(s.lo[j], r[j]);
                s.hi[j] = std::max(s.hi[j], r[j]);
            }
        return s;
    }

    std::array<double, 13> apply(const std::array<double, 13>& r) const {
        std::array<double, 13> out{};
        for (size_t j = 0; j < 13; ++j)
            out[j] = hi[j] > lo[j] ? (r[j] - lo[j]) / (hi[j] - lo[j]) : 0.0;
        return out;
    }

    std::array<double, 13> invert(const std::array<double, 13>& r) const {
        std::array<double, 13> out{};
        for (size_t j = 0; j < 13; ++j) out[j] = lo[j] + r[j] * (hi[j] - lo[j]);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Fit metrics
// ---------------------------------------------------------------------------

// R-squared as printed in the source material: sum((yhat-ybar)^2) over
// sum((y-ybar)^2) per dimension. Dimensions without label variance are
// skipped; if none remain the score is undefined.
inline double r_squared_printed(const std::vector<std::vector<double>>& pred,
                                const std::vector<std::vector<double>>& label) {
    if (pred.empty() || pred.size() != label.size())
        throw DegenerateError("prediction/label size mismatch");
    const size_t dims = label[0].size();
    double total = 0;
    int used = 0;
    for (size_t j = 0; j < dims; ++j) {
        double ybar = 0;
        for (const auto& y : label) ybar += y[j];
        ybar /= static_cast<double>(label.size());
        double num = 0, den = 0;
        for (size_t i = 0; i < label.size(); ++i) {
            num += (pred[i][j] - ybar) * (pred[i][j] - ybar);
            den += (label[i][j] - ybar) * (label[i][j] - ybar);
        }
        if (den > 0) {
            total += num / den;
            ++used;
        }
    }
    if (used == 0) throw DegenerateError("all label dimensions are constant");
    return total / used;
}

// conventional coefficient of determination, 1 - SSres/SStot, same skipping
inline double r_squared_conventional(const std::vector<std::vector<double>>& pred,
                                     const std::vector<std::vector<double>>& label) {
    if (pred.empty() || pred.size() != label.size())
        throw DegenerateError("prediction/label size mismatch");
    const size_t dims = label[0].size();
    double total = 0;
    int used = 0;
    for (size_t j = 0; j < dims; ++j) {
        double ybar = 0;
        for (const auto& y : label) ybar += y[j];
        ybar /= static_cast<double>(label.size());
        double res = 0, tot = 0;
        for (size_t i = 0; i < label.size(); ++i) {
            res += (pred[i][j] - label[i][j]) * (pred[i][j] - label[i][j]);
            tot += (label[i][j] - ybar) * (label[i][j] - ybar);
        }
        if (tot > 0) {
            total += 1.0 - res / tot;
            ++used;
        }
    }
    if (used == 0) throw DegenerateError("all label dimensions are constant");
    return total / used;
}

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

// label layout: per class {max delay, mean delay} then per class
// {max collision, mean collision}, then the indication bit
enum LabelIndex : int {
    kHpMaxDelay = 0, kHpMeanDelay, kRpMaxDelay, kRpMeanDelay, kLpMaxDelay, kLpMeanDelay,
    kHpMaxColl, kHpMeanColl, kRpMaxColl, kRpMeanColl, kLpMaxColl, kLpMeanColl,
    kIndicationBit
};

inline const std::array<const char*, 13>& label_names() {
    static const std::array<const char*, 13> names = {
        "hp_max_delay", "hp_mean_delay", "rp_max_delay", "rp_mean_delay",
        "lp_max_delay", "lp_mean_delay", "hp_max_coll",  "hp_mean_coll",
        "rp_max_coll",  "rp_mean_coll",  "lp_max_coll",  "lp_mean_coll",
        "indication_bit"};
    return names;
}

struct DatasetEntry {
    std::vector<double> features;
    std::array<double, 13> labels{};
};

struct SamplerConfig {
    int profiles = 1000;
    int hp_min = 2, hp_max = 25;
    int rp_min = 5, rp_max = 90;
    int lp_min = 5, lp_max = 90;
    double rate_lo = 1.0, rate_hi = 5.0;
    double qp_fraction = 0.5;
    double qp_jitter = 0.05;
    int intervals = 16;
    QosSpec qos;
    GuardMargins guards;  // used for the labeling assignments
    double sim_duration = 150.0;
    SamplerConfig() {
        qos.delta = {1e-3, 10e-3, 80e-3};
        qos.rho = {0.015, 0.06, 0.10};
        guards.g = {1.5, 1.45, 1.4};
    }
};

inline std::vector<DeviceProfile> sample_profile(const SamplerConfig& c, SplitMix64& rng) {
    std::vector<DeviceProfile> devs;
    const int nh = c.hp_min + static_cast<int>(rng.below(c.hp_max - c.hp_min + 1));
    const int nr = c.rp_min + static_cast<int>(rng.below(c.rp_max - c.rp_min + 1));
    const int nl = c.lp_min + static_cast<int>(rng.below(c.lp_max - c.lp_min + 1));
    int id = 1;
    auto add = [&](PriorityClass cls, int n) {
        for (int i = 0; i < n; ++i) {
            const bool qp = rng.u01() < c.qp_fraction;
            devs.push_back({id++, cls, rng.uniform(c.rate_lo, c.rate_hi),
                            qp ? ArrivalPattern::QuasiPeriodic : ArrivalPattern::Poisson,
                            qp ? c.qp_jitter : 0.0});
        }
    };
    add(PriorityClass::HP, nh);
    add(PriorityClass::RP, nr);
    add(PriorityClass::LP, nl);
    return devs;
}

// Labels for one (profile, parameter setting): run the assignment; on
// success simulate and report measured per-class delay/collision, otherwise
// set the indication bit with zeroed metrics for the unreached classes.
inline std::array<double, 13> label_entry(const std::vector<DeviceProfile>& devs,
                                          const ProtocolParams& params, const QosSpec& qos,
                                          double sim_duration, std::uint64_t seed,
                                          const GuardMargins& guards = {}) {
    std::array<double, 13> lab{};
    AssignOutcome out;
    bool feasible = false;
    try {
        out = overall_assign(devs, params, qos, guards);
        feasible = out.assignment.success;
    } catch (const OverloadError&) {
        feasible = false;
    }
    if (!feasible) {
        lab[kIndicationBit] = 1.0;
        // estimator output for whatever the assigner reached
        ClassTriple<double> dmax{}, dsum{}, cmax{}, csum{};
        ClassTriple<int> n{};
        for (size_t i = 0; i < devs.size(); ++i) {
            if (out.assignment.anchor.empty() || !out.assignment.anchor[i].assigned()) continue;
            const auto c = devs[i].cls;
            dmax.of(c) = std::max(dmax.of(c), out.est_delay[i]);
            dsum.of(c) += out.est_delay[i];
            cmax.of(c) = std::max(cmax.of(c), out.est_collision[i]);
            csum.of(c) += out.est_collision[i];
            n.of(c) += 1;
        }
        auto put = [&](PriorityClass c, int base_delay, int base_coll) {
            if (n.of(c) == 0) return;
            lab[base_delay] = dmax.of(c);
            lab[base_delay + 1] = dsum.of(c) / n.of(c);
            lab[base_coll] = cmax.of(c);
            lab[base_coll + 1] = csum.of(c) / n.of(c);
        };
        put(PriorityClass::HP, kHpMaxDelay, kHpMaxColl);
        put(PriorityClass::RP, kRpMaxDelay, kRpMaxColl);
        put(PriorityClass::LP, kLpMaxDelay, kLpMaxColl);
        return lab;
    }
    SimOptions opt;
    opt.duration = sim_duration;
    opt.seed = seed;
    opt.random_phase = true;
    PerfReport rep = simulate(devs, params, out.assignment, opt);
    auto put = [&](PriorityClass c, int base_delay, int base_coll) {
        const auto& a = rep.cls.of(c);
        lab[base_delay] = a.max_delay;
        lab[base_delay + 1] = a.mean_delay;
        lab[base_coll] = a.max_collision;
        lab[base_coll + 1] = a.mean_collision;
    };
    put(PriorityClass::HP, kHpMaxDelay, kHpMaxColl);
    put(PriorityClass::RP, kRpMaxDelay, kRpMaxColl);
    put(PriorityClass::LP, kLpMaxDelay, kLpMaxColl);
    return lab;
}

// Every entry owns its seeds, so generation parallelizes across a worker
// pool and still produces the exact same dataset in input order.
inline std::vector<DatasetEntry> generate_dataset(const SamplerConfig& sampler,
                                                  const std::vector<ProtocolParams>& grid,
                                                  int sims_per_entry, std::uint64_t seed,
                                                  int workers = 1) {
    if (grid.empty()) throw RangeError("parameter grid must not be empty");
    const int total = sampler.profiles * static_cast<int>(grid.size());
    std::vector<DatasetEntry> out(total);

    auto build = [&](int profile_idx) {
        SplitMix64 rng(mix_seed(seed, static_cast<std::uint64_t>(profile_idx)));
        const auto devs = sample_profile(sampler, rng);
        const auto enc =
            encode_profile(devs, sampler.intervals, sampler.rate_lo, sampler.rate_hi);
        for (size_t g = 0; g < grid.size(); ++g) {
            DatasetEntry e;
            e.features = encode_features(enc, grid[g]);
            std::array<double, 13> acc{};
            const int reps = std::max(1, sims_per_entry);
            for (int r = 0; r < reps; ++r) {
                const std::uint64_t s =
                    mix_seed(seed, (static_cast<std::uint64_t>(profile_idx) << 20) ^
                                       (static_cast<std::uint64_t>(g) << 4) ^
                                       static_cast<std::uint64_t>(r));
                auto lab = label_entry(devs, grid[g], sampler.qos, sampler.sim_duration, s,
                                       sampler.guards);
                for (size_t k = 0; k < 13; ++k) acc[k] += lab[k];
            }
            for (size_t k = 0; k < 13; ++k) acc[k] /= reps;
            acc[kIndicationBit] = acc[kIndicationBit] >= 0.5 ? 1.0 : 0.0;
            out[profile_idx * grid.size() + g] = std::move(e);
            out[profile_idx * grid.size() + g].labels = acc;
        }
    };

    if (workers <= 1) {
        for (int i = 0; i < sampler.profiles; ++i) build(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= sampler.profiles) return;
                    build(i);
                }
            });
        for (auto& t : pool) t.join();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
    double lr = 1e-3, beta1 = 0.9, beta2 = 0.999;
    int batch = 128;
    int epochs = 50;
    double train_frac = 0.8, val_frac = 0.1;  // remainder is the test split
    std::uint64_t seed = 1;
};

struct EpochStats {
    double train_loss = 0;  // optimizer view (dropout active)
    double val_loss = 0;    // evaluation mode
    double val_r2 = 0;      // printed form on normalized labels
};

struct TrainedModel {
    Mlp net;
    Zscore feature_norm;
    MinMaxScaler label_scale;
    std::vector<EpochStats> history;
    double test_r2_printed = 0;
    double test_r2_conventional = 0;
    double test_bit_accuracy = 0;
    double final_train_loss_eval = 0;  // clean train loss at the end
    double final_val_loss = 0;
    std::vector<int> train_idx, val_idx, test_idx;
};

inline TrainedModel train(const RegressorSpec& spec, const std::vector<DatasetEntry>& data,
                          const TrainConfig& cfg) {
    if (data.size() < static_cast<size_t>(cfg.batch))
        throw RangeError("dataset smaller than one batch");
    TrainedModel tm;
    SplitMix64 rng(mix_seed(cfg.seed, 0x7EA1));

    std::vector<int> idx(data.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    for (size_t i = idx.size(); i > 1; --i)
        std::swap(idx[i - 1], idx[rng.below(i)]);
    const size_t n_train = static_cast<size_t>(cfg.train_frac * data.size());
    const size_t n_val = static_cast<size_t>(cfg.val_frac * data.size());
    tm.train_idx.assign(idx.begin(), idx.begin() + n_train);
    tm.val_idx.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    tm.test_idx.assign(idx.begin() + n_train + n_val, idx.end());

    std::vector<std::vector<double>> train_feats;
    std::vector<std::array<double, 13>> train_labels;
    for (int i : tm.train_idx) {
        train_feats.push_back(data[i].features);
        train_labels.push_back(data[i].labels);
    }
    tm.feature_norm = Zscore::fit(train_feats);
    tm.label_scale = MinMaxScaler::fit(train_labels);

    const int in_w = static_cast<int>(data[0].features.size());
    const int out_w = 13;
    if (spec.input_width != in_w) throw ShapeError("spec input width mismatch");
    if (spec.output_width() != out_w) throw ShapeError("regressor must have 13 outputs");
    tm.net = Mlp(spec, mix_seed(cfg.seed, 0x371));

    auto make_xy = [&](const std::vector<int>& ids, std::vector<double>& X,
                       std::vector<double>& Y) {
        X.resize(ids.size() * in_w);
        Y.resize(ids.size() * out_w);
        for (size_t r = 0; r < ids.size(); ++r) {
            const auto f = tm.feature_norm.apply(data[ids[r]].features);
            std::copy(f.begin(), f.end(), X.begin() + r * in_w);
            const auto l = tm.label_scale.apply(data[ids[r]].labels);
            std::copy(l.begin(), l.end(), Y.begin() + r * out_w);
        }
    };

    std::vector<double> val_X, val_Y, test_X, test_Y, train_X, train_Y;
    make_xy(tm.val_idx, val_X, val_Y);
    make_xy(tm.test_idx, test_X, test_Y);
    make_xy(tm.train_idx, train_X, train_Y);

    std::vector<int> order(tm.train_idx.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<double> bx, by;

    auto eval_r2 = [&](const std::vector<double>& X, const std::vector<double>& Y,
                       size_t rows, bool printed) {
        std::vector<std::vector<double>> preds, labels;
        preds.reserve(rows);
        labels.reserve(rows);
        for (size_t r = 0; r < rows; ++r) {
            auto y = tm.net.forward(
                std::span<const double>(X.data() + r * in_w, in_w));
            preds.push_back(std::move(y));
            labels.emplace_back(Y.begin() + r * out_w, Y.begin() + (r + 1) * out_w);
        }
        return printed ? r_squared_printed(preds, labels)
                       : r_squared_conventional(preds, labels);
    };

    std::uint64_t step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[rng.below(i)]);
        double loss_sum = 0;
        int steps = 0;
        for (size_t pos = 0; pos < order.size(); pos += cfg.batch) {
            const int rows = static_cast<int>(std::min<size_t>(cfg.batch, order.size() - pos));
            bx.resize(static_cast<size_t>(rows) * in_w);
            by.resize(static_cast<size_t>(rows) * out_w);
            for (int r = 0; r < rows; ++r) {
                const int src = order[pos + r];
                std::copy_n(train_X.begin() + static_cast<size_t>(src) * in_w, in_w,
                            bx.begin() + static_cast<size_t>(r) * in_w);
                std::copy_n(train_Y.begin() + static_cast<size_t>(src) * out_w, out_w,
                            by.begin() + static_cast<size_t>(r) * out_w);
            }
            loss_sum += tm.net.train_step(bx, by, rows, cfg.lr, cfg.beta1, cfg.beta2,
                                          mix_seed(cfg.seed, 0xD0 + step));
            ++steps;
            ++step;
        }
        EpochStats es;
        es.train_loss = loss_sum / std::max(1, steps);
        es.val_loss = tm.net.eval_loss(val_X, val_Y, static_cast<int>(tm.val_idx.size()));
        es.val_r2 = eval_r2(val_X, val_Y, tm.val_idx.size(), true);
        tm.history.push_back(es);
    }

    tm.final_val_loss = tm.net.eval_loss(val_X, val_Y, static_cast<int>(tm.val_idx.size()));
    tm.final_train_loss_eval =
        tm.net.eval_loss(train_X, train_Y, static_cast<int>(tm.train_idx.size()));
    tm.test_r2_printed = eval_r2(test_X, test_Y, tm.test_idx.size(), true);
    tm.test_r2_conventional = eval_r2(test_X, test_Y, tm.test_idx.size(), false);

    long correct = 0;
    for (size_t r = 0; r < tm.test_idx.size(); ++r) {
        auto y = tm.net.forward(
            std::span<const double>(test_X.data() + r * in_w, in_w));
        const bool pred = y[kIndicationBit] >= 0.5;
        const bool truth = test_Y[r * out_w + kIndicationBit] >= 0.5;
        if (pred == truth) ++correct;
    }
    tm.test_bit_accuracy =
        tm.test_idx.empty() ? 0.0 : static_cast<double>(correct) / tm.test_idx.size();
    return tm;
}

// ---------------------------------------------------------------------------
// Parameter selection
// ---------------------------------------------------------------------------

struct CandidateScore {
    ProtocolParams params;
    std::array<double, 13> predicted{};  // label units
    double margin = 0;                   // minimum relative QoS slack
};

// Predicts the 13 outputs per candidate, filters predicted-infeasible ones,
// and ranks survivors by (feasibility margin, smaller n_m). The model output
// is scaled back to label units before the thresholds are applied.
inline std::vector<CandidateScore> select_params(const std::vector<DeviceProfile>& profile,
                                                 const std::vector<ProtocolParams>& candidates,
                                                 const TrainedModel& tm, const QosSpec& qos,
                                                 int intervals, double lambda_min,
                                                 double lambda_max) {
    const auto enc = encode_profile(profile, intervals, lambda_min, lambda_max);
    std::vector<CandidateScore> ranked;
    for (const auto& p : candidates) {
        if (p.n_m < 1 || p.r_h < 1 || p.r_r % p.r_h != 0 || p.r_l % p.r_r != 0)
            continue;  // structural validation gate, no model query
        auto feats = tm.feature_norm.apply(encode_features(enc, p));
        auto raw = tm.net.forward(feats);
        std::array<double, 13> y{};
        for (size_t k = 0; k < 13; ++k) y[k] = std::clamp(raw[k], 0.0, 1.0);
        y = tm.label_scale.invert(y);
        if (y[kIndicationBit] >= 0.5) continue;

        const double checks[12] = {
            qos.delta.hp - y[kHpMaxDelay], qos.delta.hp - y[kHpMeanDelay],
            qos.delta.rp - y[kRpMaxDelay], qos.delta.rp - y[kRpMeanDelay],
            qos.delta.lp - y[kLpMaxDelay], qos.delta.lp - y[kLpMeanDelay],
            qos.rho.hp - y[kHpMaxColl],    qos.rho.hp - y[kHpMeanColl],
            qos.rho.rp - y[kRpMaxColl],    qos.rho.rp - y[kRpMeanColl],
            qos.rho.lp - y[kLpMaxColl],    qos.rho.lp - y[kLpMeanColl]};
        const double bounds[12] = {qos.delta.hp, qos.delta.hp, qos.delta.rp, qos.delta.rp,
                                   qos.delta.lp, qos.delta.lp, qos.rho.hp,   qos.rho.hp,
                                   qos.rho.rp,   qos.rho.rp,   qos.rho.lp,   qos.rho.lp};
        double margin = 1e300;
        bool ok = true;
        for (int k = 0; k < 12; ++k) {
            if (checks[k] < 0) ok = false;
            if (bounds[k] > 0) margin = std::min(margin, checks[k] / bounds[k]);
        }
        if (!ok) continue;
        CandidateScore cs;
        cs.params = p;
        cs.predicted = y;
        cs.margin = margin;
        ranked.push_back(cs);
    }
    if (ranked.empty()) throw NoFeasibleCandidate("no candidate passed the predicted QoS filter");
    std::sort(ranked.begin(), ranked.end(), [](const CandidateScore& a, const CandidateScore& b) {
        if (a.margin != b.margin) return a.margin > b.margin;
        if (a.params.n_m != b.params.n_m) return a.params.n_m < b.params.n_m;
        return a.params.r_r < b.params.r_r;
    });
    return ranked;
}

} // namespace msmac
