#pragma once

// Layered (feedforward) transmission neural networks.
//
// Layer k maps s(k) to
//     s_i(k+1) = sum_j a_ij f(w_ij, s_j(k)) + bias_i
// where f is the configured tunable activation and w_ij in [0,1] is the
// activation level of link (i, j). A layer marked `linear` skips f, which
// gives the input stage eta^T x + b of the single-hidden-layer form
//     y(x) = sum_i a_i f(w_i, eta_i^T x + b).
// Layers of unequal width are plain rectangular matrices; the equal-width
// formulation with unactivated padding nodes is equivalent.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "transnn/activations.hpp"
#include "transnn/dynamics.hpp"
#include "transnn/types.hpp"

namespace transnn::learn {

enum class OutputHead { Identity, ProbObservation, LogSoftmax };

inline std::string_view to_string(OutputHead h) {
    switch (h) {
        case OutputHead::Identity: return "identity";
        case OutputHead::ProbObservation: return "prob";
        case OutputHead::LogSoftmax: return "log_softmax";
    }
    return "identity";
}

inline OutputHead parse_output_head(std::string_view name) {
    if (name == "identity") return OutputHead::Identity;
    if (name == "prob") return OutputHead::ProbObservation;
    if (name == "log_softmax") return OutputHead::LogSoftmax;
    throw std::invalid_argument("unknown output head '" + std::string(name) + "'");
}

// PerSource shares one level per input node across all outputs of the layer
// (w is stored as a 1 x inputs matrix).
enum class LevelSharing { PerLink, PerSource };

struct Layer {
    Matrix a;     // outputs x inputs
    Matrix w;     // outputs x inputs, or 1 x inputs when shared per source
    Vector bias;  // outputs
    LevelSharing sharing = LevelSharing::PerLink;
    bool linear = false;
    bool train_a = true;
    bool train_w = true;
    bool train_bias = true;

    std::size_t inputs() const noexcept { return a.cols(); }
    std::size_t outputs() const noexcept { return a.rows(); }
    double level(std::size_t i, std::size_t j) const {
        return sharing == LevelSharing::PerLink ? w(i, j) : w(0, j);
    }
};

class LayeredTransNN {
public:
    LayeredTransNN() = default;
    LayeredTransNN(std::vector<Layer> layers, ActivationKind activation, OutputHead head,
                   std::optional<double> fixed_bias = std::nullopt, std::uint64_t seed = 0)
        : layers_(std::move(layers)), activation_(activation), head_(head), fixed_bias_(fixed_bias), seed_(seed) {
        validate();
    }

    const std::vector<Layer>& layers() const noexcept { return layers_; }
    std::vector<Layer>& layers() noexcept { return layers_; }
    ActivationKind activation() const noexcept { return activation_; }
    OutputHead head() const noexcept { return head_; }
    std::optional<double> fixed_bias() const noexcept { return fixed_bias_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::size_t input_size() const { return layers_.front().inputs(); }
    std::size_t output_size() const { return layers_.back().outputs(); }

    std::vector<std::size_t> layer_sizes() const {
        std::vector<std::size_t> sizes{input_size()};
        for (const auto& l : layers_) sizes.push_back(l.outputs());
        return sizes;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& l : layers_) n += l.a.size() + l.w.size() + l.bias.size();
        return n;
    }

    /// Clamps every activation level into [0,1].
    void project() {
        for (auto& l : layers_) {
            for (double& v : l.w.data()) v = std::clamp(v, 0.0, 1.0);
        }
    }

    void validate() const {
        if (layers_.empty()) throw std::invalid_argument("LayeredTransNN: no layers");
        for (std::size_t k = 0; k < layers_.size(); ++k) {
            const Layer& l = layers_[k];
            const std::string where = "layer " + std::to_string(k);
            if (k > 0 && l.inputs() != layers_[k - 1].outputs()) {
                throw std::invalid_argument(where + ": input width does not match previous layer");
            }
            const std::size_t wrows = l.sharing == LevelSharing::PerLink ? l.outputs() : 1;
            if (l.w.rows() != wrows || l.w.cols() != l.inputs()) {
                throw std::invalid_argument(where + ": activation-level shape mismatch");
            }
            if (l.bias.size() != l.outputs()) throw std::invalid_argument(where + ": bias length mismatch");
            for (double v : l.w.data()) {
                if (!(v >= 0.0 && v <= 1.0)) throw DomainError(where + ": activation level outside [0,1]");
            }
        }
        if (fixed_bias_) {
            if (*fixed_bias_ == 0.0) throw std::invalid_argument("fixed bias b must be nonzero");
            if (activation_ == ActivationKind::TLogSigmoidPlus && *fixed_bias_ <= 0.0) {
                throw std::invalid_argument("TLogSigmoidPlus approximator requires a positive bias b");
            }
        }
        if (head_ == OutputHead::LogSoftmax && output_size() < 2) {
            throw std::invalid_argument("log-softmax head needs at least two outputs");
        }
    }

    /// Views the layers as general transmission layers (per-link levels).
    std::vector<TransLayer> trans_layers() const {
        std::vector<TransLayer> out;
        for (const auto& l : layers_) {
            TransLayer t{l.a, Matrix(l.outputs(), l.inputs())};
            for (std::size_t i = 0; i < l.outputs(); ++i) {
                for (std::size_t j = 0; j < l.inputs(); ++j) t.w(i, j) = l.linear ? 1.0 : l.level(i, j);
            }
            out.push_back(std::move(t));
        }
        return out;
    }

private:
    std::vector<Layer> layers_;
    ActivationKind activation_ = ActivationKind::TLogSigmoid;
    OutputHead head_ = OutputHead::Identity;
    std::optional<double> fixed_bias_;
    std::uint64_t seed_ = 0;
};

// ---------------------------------------------------------------------------
// Construction

struct InitOptions {
    double level = 0.5;  // initial activation level
    double bias = 1.0;
    bool linear_input = false;  // first layer skips the activation
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], levels at 0.5, bias 1.
inline LayeredTransNN make_feedforward(const std::vector<std::size_t>& sizes, ActivationKind activation,
                                       OutputHead head, std::uint64_t seed, const InitOptions& init = {}) {
    if (sizes.size() < 2) throw std::invalid_argument("make_feedforward: need at least input and output sizes");
    std::mt19937_64 rng(seed);
    std::vector<Layer> layers;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        const std::size_t in = sizes[k], out = sizes[k + 1];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> dist(-scale, scale);
        Layer l;
        l.a = Matrix(out, in);
        for (double& v : l.a.data()) v = dist(rng);
        l.w = Matrix(out, in, init.level);
        l.bias = Vector(out, init.bias);
        l.linear = init.linear_input && k == 0;
        if (l.linear) {
            l.w = Matrix(out, in, 1.0);
            l.train_w = false;
        }
        layers.push_back(std::move(l));
    }
    return LayeredTransNN(std::move(layers), activation, head, std::nullopt, seed);
}

/// y_r(x) = sum_i a_ri f(w_i, eta_i^T x + b) with a fixed shared bias b != 0.
/// Levels w_i and directions eta_i are shared across the m outputs.
inline LayeredTransNN make_single_hidden(std::size_t inputs, std::size_t width, std::size_t outputs,
                                         ActivationKind activation, double b, std::uint64_t seed,
                                         double eta_scale = 1.0) {
    if (width == 0) throw std::invalid_argument("make_single_hidden: width must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Layer input;
    input.linear = true;
    input.a = Matrix(width, inputs);
    for (double& v : input.a.data()) v = eta_scale * unit(rng);
    input.w = Matrix(width, inputs, 1.0);
    input.bias = Vector(width, b);
    input.train_w = false;
    input.train_bias = false;

    Layer hidden;
    hidden.sharing = LevelSharing::PerSource;
    hidden.a = Matrix(outputs, width);
    const double scale = 1.0 / std::sqrt(static_cast<double>(width));
    for (double& v : hidden.a.data()) v = scale * unit(rng);
    hidden.w = Matrix(1, width, 0.5);
    hidden.bias = Vector(outputs, 0.0);
    hidden.train_bias = false;

    std::vector<Layer> layers;
    layers.push_back(std::move(input));
    layers.push_back(std::move(hidden));
    return LayeredTransNN(std::move(layers), activation, OutputHead::Identity, b, seed);
}

// ---------------------------------------------------------------------------
// Forward / backward

struct Tape {
    std::vector<Vector> states;  // s(0) .. s(T), before the output head
    Vector output;
};

inline Vector apply_head(OutputHead head, const Vector& s) {
    Vector out(s.size());
    switch (head) {
        case OutputHead::Identity: return s;
        case OutputHead::ProbObservation:
            for (std::size_t i = 0; i < s.size(); ++i) out[i] = -std::expm1(-s[i]);
            return out;
        case OutputHead::LogSoftmax: {
            double mx = -kInfinity;
            for (double v : s) mx = std::max(mx, v);
            double sum = 0.0;
            for (double v : s) sum += std::exp(v - mx);
            const double lse = mx + std::log(sum);
            for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] - lse;
            return out;
        }
    }
    return s;
}

inline Vector layer_forward(const Layer& l, ActivationKind kind, std::span<const double> s) {
    Vector next(l.outputs());
    for (std::size_t i = 0; i < l.outputs(); ++i) {
        double acc = l.bias[i];
        for (std::size_t j = 0; j < l.inputs(); ++j) {
            const double aij = l.a(i, j);
            if (aij == 0.0) continue;
            acc += aij * (l.linear ? s[j] : activate(kind, l.level(i, j), s[j]));
        }
        next[i] = acc;
    }
    return next;
}

inline Tape forward(const LayeredTransNN& model, std::span<const double> x) {
    if (x.size() != model.input_size()) throw std::invalid_argument("forward: input length mismatch");
    Tape tape;
    tape.states.reserve(model.layers().size() + 1);
    tape.states.emplace_back(x.begin(), x.end());
    for (const auto& l : model.layers()) tape.states.push_back(layer_forward(l, model.activation(), tape.states.back()));
    tape.output = apply_head(model.head(), tape.states.back());
    return tape;
}

inline Vector predict(const LayeredTransNN& model, std::span<const double> x) { return forward(model, x).output; }

/// Gradients with the same layout as the model parameters.
struct Gradients {
    std::vector<Matrix> a;
    std::vector<Matrix> w;
    std::vector<Vector> bias;

    static Gradients zeros_like(const LayeredTransNN& model) {
        Gradients g;
        for (const auto& l : model.layers()) {
            g.a.emplace_back(l.a.rows(), l.a.cols());
            g.w.emplace_back(l.w.rows(), l.w.cols());
            g.bias.emplace_back(l.bias.size(), 0.0);
        }
        return g;
    }

    void add(const Gradients& other, double scale = 1.0) {
        for (std::size_t k = 0; k < a.size(); ++k) {
            for (std::size_t i = 0; i < a[k].size(); ++i) a[k].data()[i] += scale * other.a[k].data()[i];
            for (std::size_t i = 0; i < w[k].size(); ++i) w[k].data()[i] += scale * other.w[k].data()[i];
            for (std::size_t i = 0; i < bias[k].size(); ++i) bias[k][i] += scale * other.bias[k][i];
        }
    }
};

/// Gradient of the head w.r.t. the final state, given dL/d(output).
inline Vector head_backward(OutputHead head, const Vector& s, const Vector& output, std::span<const double> g) {
    Vector ds(s.size());
    switch (head) {
        case OutputHead::Identity:
            ds.assign(g.begin(), g.end());
            break;
        case OutputHead::ProbObservation:
            for (std::size_t i = 0; i < s.size(); ++i) ds[i] = g[i] * std::exp(-s[i]);
            break;
        case OutputHead::LogSoftmax: {
            double gsum = 0.0;
            for (double v : g) gsum += v;
            for (std::size_t i = 0; i < s.size(); ++i) ds[i] = g[i] - std::exp(output[i]) * gsum;
            break;
        }
    }
    return ds;
}

/// Reverse-mode gradients from the closed-form partial derivatives of the
/// activation in w and in x.
inline Gradients backward(const LayeredTransNN& model, const Tape& tape, std::span<const double> output_grad) {
    if (output_grad.size() != model.output_size()) throw std::invalid_argument("backward: gradient length mismatch");
    Gradients grads = Gradients::zeros_like(model);
    const ActivationKind kind = model.activation();
    Vector g = head_backward(model.head(), tape.states.back(), tape.output, output_grad);
    for (std::size_t k = model.layers().size(); k-- > 0;) {
        const Layer& l = model.layers()[k];
        const Vector& s = tape.states[k];
        Vector gin(l.inputs(), 0.0);
        for (std::size_t i = 0; i < l.outputs(); ++i) {
            const double gi = g[i];
            grads.bias[k][i] = gi;
            if (gi == 0.0) continue;
            for (std::size_t j = 0; j < l.inputs(); ++j) {
                const double aij = l.a(i, j);
                if (l.linear) {
                    grads.a[k](i, j) = gi * s[j];
                    gin[j] += gi * aij;
                    continue;
                }
                const double wij = l.level(i, j);
                grads.a[k](i, j) = gi * activate(kind, wij, s[j]);
                const double dw = gi * aij * activate_dw(kind, wij, s[j]);
                if (l.sharing == LevelSharing::PerLink) grads.w[k](i, j) = dw;
                else grads.w[k](0, j) += dw;
                gin[j] += gi * aij * activate_dx(kind, wij, s[j]);
            }
        }
        g = std::move(gin);
    }
    return grads;
}

}  // namespace transnn::learn
