#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "msmac/rng.hpp"

namespace msmac {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Act : int { Elu = 0, Relu = 1 };

struct LayerSpec {
    int width = 0;
    Act act = Act::Relu;
    double dropout = 0.0;  // applied to the layer output, training only
};

struct RegressorSpec {
    int input_width = 0;
    std::vector<LayerSpec> layers;

    // 1024/1024/512/256/128/64/13, elu on the wide layers, 70% dropout on
    // the first two
    static RegressorSpec paper(int input_width) {
        RegressorSpec s;
        s.input_width = input_width;
        s.layers = {{1024, Act::Elu, 0.7}, {1024, Act::Elu, 0.7}, {512, Act::Elu, 0.0},
                    {256, Act::Relu, 0.0}, {128, Act::Relu, 0.0}, {64, Act::Relu, 0.0},
                    {13, Act::Relu, 0.0}};
        return s;
    }

    int output_width() const { return layers.empty() ? 0 : layers.back().width; }
};

inline double activate(Act a, double x) {
    if (a == Act::Relu) return x > 0 ? x : 0.0;
    return x > 0 ? x : std::expm1(x);  // elu, alpha = 1
}

inline double activate_grad(Act a, double x) {
    if (a == Act::Relu) return x > 0 ? 1.0 : 0.0;
    return x > 0 ? 1.0 : std::exp(x);
}

// Dense feed-forward regressor with Adam and inverted dropout. All buffers
// are flat row-major; one instance owns its optimizer state.
class Mlp {
public:
    Mlp() = default;

    Mlp(RegressorSpec spec, std::uint64_t seed) : spec_(std::move(spec)) {
        if (spec_.layers.empty()) throw ShapeError("regressor needs at least one layer");
        SplitMix64 rng(mix_seed(seed, 0x11));
        int in = spec_.input_width;
        for (const auto& l : spec_.layers) {
            Layer layer;
            layer.in = in;
            layer.out = l.width;
            layer.w.resize(static_cast<size_t>(l.width) * in);
            layer.b.resize(l.width);
            const double bound = 1.0 / std::sqrt(static_cast<double>(in));
            for (auto& w : layer.w) w = rng.uniform(-bound, bound);
            // nonzero bias init keeps pre-activations off the relu kink
            for (auto& b : layer.b) b = rng.uniform(-bound * 0.1, bound * 0.1);
            layer.mw.assign(layer.w.size(), 0.0);
            layer.vw.assign(layer.w.size(), 0.0);
            layer.mb.assign(layer.b.size(), 0.0);
            layer.vb.assign(layer.b.size(), 0.0);
            layers_.push_back(std::move(layer));
            in = l.width;
        }
    }

    const RegressorSpec& spec() const { return spec_; }

    // Inference on one sample; no dropout.
    std::vector<double> forward(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != spec_.input_width)
            throw ShapeError("input width mismatch");
        std::vector<double> cur(x.begin(), x.end()), next;
        for (size_t li = 0; li < layers_.size(); ++li) {
            const Layer& L = layers_[li];
            next.assign(L.out, 0.0);
            for (int o = 0; o < L.out; ++o) {
                const double* wr = &L.w[static_cast<size_t>(o) * L.in];
                double acc = L.b[o];
                for (int i = 0; i < L.in; ++i) acc += wr[i] * cur[i];
                next[o] = activate(spec_.layers[li].act, acc);
            }
            cur.swap(next);
        }
        return cur;
    }

    // One optimization step on a batch (rows of X, rows of Y). Dropout masks
    // are drawn from the given seed; returns the batch MSE (with dropout
    // active, as seen by the optimizer).
    double train_step(std::span<const double> X, std::span<const double> Y, int batch,
                      double lr, double beta1, double beta2, std::uint64_t dropout_seed) {
        const int in0 = spec_.input_width;
        const int out_w = spec_.output_width();
        if (static_cast<int>(X.size()) != batch * in0 ||
            static_cast<int>(Y.size()) != batch * out_w)
            throw ShapeError("batch shape mismatch");
        SplitMix64 drng(dropout_seed);

        // forward with caches
        const size_t n_layers = layers_.size();
        acts_.resize(n_layers + 1);
        pre_.resize(n_layers);
        masks_.resize(n_layers);
        acts_[0].assign(X.begin(), X.end());
        for (size_t li = 0; li < n_layers; ++li) {
            Layer& L = layers_[li];
            pre_[li].assign(static_cast<size_t>(batch) * L.out, 0.0);
            acts_[li + 1].assign(static_cast<size_t>(batch) * L.out, 0.0);
            const auto& src = acts_[li];
            for (int b = 0; b < batch; ++b) {
                const double* xr = &src[static_cast<size_t>(b) * L.in];
                double* zr = &pre_[li][static_cast<size_t>(b) * L.out];
                for (int o = 0; o < L.out; ++o) {
                    const double* wr = &L.w[static_cast<size_t>(o) * L.in];
                    double acc = L.b[o];
                    for (int i = 0; i < L.in; ++i) acc += wr[i] * xr[i];
                    zr[o] = acc;
                }
            }
            const Act act = spec_.layers[li].act;
            const double p = spec_.layers[li].dropout;
            auto& mask = masks_[li];
            if (p > 0) {
                mask.resize(static_cast<size_t>(batch) * L.out);
                const double keep_scale = 1.0 / (1.0 - p);
                for (auto& m : mask) m = drng.u01() >= p ? keep_scale : 0.0;
            } else {
                mask.clear();
            }
            for (size_t k = 0; k < pre_[li].size(); ++k) {
                double a = activate(act, pre_[li][k]);
                if (p > 0) a *= mask[k];
                acts_[li + 1][k] = a;
            }
        }

        // loss and output gradient: MSE over batch and output dims
        const auto& out = acts_[n_layers];
        std::vector<double> delta(out.size());
        double loss = 0;
        const double norm = 2.0 / static_cast<double>(out.size());
        for (size_t k = 0; k < out.size(); ++k) {
            const double d = out[k] - Y[k];
            loss += d * d;
            delta[k] = norm * d;
        }
        loss /= static_cast<double>(out.size());

        // backward
        ++adam_t_;
        for (size_t li = n_layers; li-- > 0;) {
            Layer& L = layers_[li];
            const Act act = spec_.layers[li].act;
            const auto& mask = masks_[li];
            // through dropout and activation
            for (int b = 0; b < batch; ++b) {
                double* dr = &delta[static_cast<size_t>(b) * L.out];
                const double* zr = &pre_[li][static_cast<size_t>(b) * L.out];
                const double* mr = mask.empty() ? nullptr : &mask[static_cast<size_t>(b) * L.out];
                for (int o = 0; o < L.out; ++o) {
                    double g = dr[o] * activate_grad(act, zr[o]);
                    if (mr) g *= mr[o];
                    dr[o] = g;
                }
            }
            // weight/bias gradients and the propagated delta
            dw_.assign(L.w.size(), 0.0);
            db_.assign(L.b.size(), 0.0);
            std::vector<double> prev_delta;
            const bool need_prev = li > 0;
            if (need_prev) prev_delta.assign(static_cast<size_t>(batch) * L.in, 0.0);
            const auto& src = acts_[li];
            for (int b = 0; b < batch; ++b) {
                const double* dr = &delta[static_cast<size_t>(b) * L.out];
                const double* xr = &src[static_cast<size_t>(b) * L.in];
                double* pd = need_prev ? &prev_delta[static_cast<size_t>(b) * L.in] : nullptr;
                for (int o = 0; o < L.out; ++o) {
                    const double g = dr[o];
                    if (g == 0.0) continue;
                    double* dwr = &dw_[static_cast<size_t>(o) * L.in];
                    const double* wr = &L.w[static_cast<size_t>(o) * L.in];
                    db_[o] += g;
                    for (int i = 0; i < L.in; ++i) dwr[i] += g * xr[i];
                    if (pd)
                        for (int i = 0; i < L.in; ++i) pd[i] += g * wr[i];
                }
            }
            // delta already carries the 1/(batch*out) loss normalization
            adam_update(2 * li, L.w, L.mw, L.vw, dw_, lr, beta1, beta2);
            adam_update(2 * li + 1, L.b, L.mb, L.vb, db_, lr, beta1, beta2);
            if (need_prev) delta.swap(prev_delta);
        }
        return loss;
    }

    // MSE without dropout (evaluation mode).
    double eval_loss(std::span<const double> X, std::span<const double> Y, int rows) const {
        const int out_w = spec_.output_width();
        double loss = 0;
        for (int r = 0; r < rows; ++r) {
            auto y = forward(X.subspan(static_cast<size_t>(r) * spec_.input_width,
                                       spec_.input_width));
            for (int k = 0; k < out_w; ++k) {
                const double d = y[k] - Y[static_cast<size_t>(r) * out_w + k];
                loss += d * d;
            }
        }
        return loss / (static_cast<double>(rows) * out_w);
    }

    // gradient access for the finite-difference check (test support)
    double loss_only(std::span<const double> X, std::span<const double> Y, int rows) const {
        return eval_loss(X, Y, rows);
    }

    std::vector<std::vector<double>*> weight_blocks() {
        std::vector<std::vector<double>*> out;
        for (auto& l : layers_) {
            out.push_back(&l.w);
            out.push_back(&l.b);
        }
        return out;
    }

    // analytic gradients of the MSE loss at the current parameters, dropout
    // off; same layout as weight_blocks()
    std::vector<std::vector<double>> gradients(std::span<const double> X,
                                               std::span<const double> Y, int batch) const {
        Mlp copy = *this;
        for (auto& l : copy.spec_.layers) l.dropout = 0.0;
        copy.grad_capture_ = true;
        copy.captured_.assign(2 * copy.layers_.size(), {});
        copy.train_step(X, Y, batch, 0.0, 0.9, 0.999, 1);
        return std::move(copy.captured_);
    }

private:
    struct Layer {
        int in = 0, out = 0;
        std::vector<double> w, b;
        std::vector<double> mw, vw, mb, vb;  // Adam moments
    };

    void adam_update(size_t slot, std::vector<double>& p, std::vector<double>& m,
                     std::vector<double>& v, const std::vector<double>& grad, double lr,
                     double beta1, double beta2) {
        if (grad_capture_) {
            captured_[slot] = grad;
            return;
        }
        const double eps = 1e-8;
        const double bc1 = 1.0 - std::pow(beta1, adam_t_);
        const double bc2 = 1.0 - std::pow(beta2, adam_t_);
        for (size_t i = 0; i < p.size(); ++i) {
            const double g = grad[i];
            m[i] = beta1 * m[i] + (1 - beta1) * g;
            v[i] = beta2 * v[i] + (1 - beta2) * g * g;
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            p[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }

    RegressorSpec spec_;
    std::vector<Layer> layers_;
    long adam_t_ = 0;
    // scratch
    std::vector<std::vector<double>> acts_, pre_, masks_;
    std::vector<double> dw_, db_;
    bool grad_capture_ = false;
    std::vector<std::vector<double>> captured_;
public:
    // serialization access
    struct LayerView {
        const std::vector<double>*w, *b;
        int in, out;
    };
    std::vector<LayerView> layer_views() const {
        std::vector<LayerView> v;
        for (const auto& l : layers_) v.push_back({&l.w, &l.b, l.in, l.out});
        return v;
    }
    void set_layer_params(size_t li, std::vector<double> w, std::vector<double> b) {
        if (li >= layers_.size() || w.size() != layers_[li].w.size() ||
            b.size() != layers_[li].b.size())
            throw ShapeError("layer parameter shape mismatch");
        layers_[li].w = std::move(w);
        layers_[li].b = std::move(b);
    }
};

} // namespace msmac
