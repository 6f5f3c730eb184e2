#pragma once

// Gradient-based training of layered transmission networks.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "transnn/learn/model.hpp"
#include "transnn/types.hpp"

namespace transnn::learn {

/// Row-per-sample dataset. For NLL the target is a single column holding the
/// class index.
struct Dataset {
    Matrix inputs;
    Matrix targets;

    std::size_t size() const noexcept { return inputs.rows(); }
    bool empty() const noexcept { return inputs.rows() == 0; }
    std::span<const double> input(std::size_t i) const { return inputs.row(i); }
    std::span<const double> target(std::size_t i) const { return targets.row(i); }
};

enum class Loss { MSE, NLL };
enum class OptimizerKind { SGD, Adam };
enum class Schedule { Constant, Exponential, Step };

inline Loss parse_loss(std::string_view s) {
    if (s == "mse") return Loss::MSE;
    if (s == "nll") return Loss::NLL;
    throw std::invalid_argument("unknown loss '" + std::string(s) + "'");
}
inline std::string_view to_string(Loss l) { return l == Loss::MSE ? "mse" : "nll"; }

inline OptimizerKind parse_optimizer(std::string_view s) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adam") return OptimizerKind::Adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}
inline std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::SGD ? "sgd" : "adam"; }

inline Schedule parse_schedule(std::string_view s) {
    if (s == "constant") return Schedule::Constant;
    if (s == "exponential") return Schedule::Exponential;
    if (s == "step") return Schedule::Step;
    throw std::invalid_argument("unknown schedule '" + std::string(s) + "'");
}
inline std::string_view to_string(Schedule s) {
    switch (s) {
        case Schedule::Constant: return "constant";
        case Schedule::Exponential: return "exponential";
        case Schedule::Step: return "step";
    }
    return "constant";
}

struct TrainConfig {
    Loss loss = Loss::MSE;
    double l2 = 0.0;  // coefficient of sum a^2 over trainable weights
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 1e-2;
    Schedule schedule = Schedule::Constant;
    double decay = 1.0;             // factor per epoch (exponential) or per step_size epochs (step)
    std::size_t step_size = 10;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;    // 0 means full batch
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool train_a = true;
    bool train_w = true;
    bool train_eta = true;   // weights of a linear input layer
    bool train_bias = true;
    std::size_t threads = 1;

    void validate() const {
        if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
            throw ValidationError("learning_rate", "must be a finite nonnegative number");
        }
        if (!(l2 >= 0.0)) throw ValidationError("l2", "must be nonnegative");
        if (!(decay > 0.0)) throw ValidationError("decay", "must be positive");
        if (step_size == 0) throw ValidationError("step_size", "must be positive");
        if (epochs == 0) throw ValidationError("epochs", "must be positive");
        if (threads == 0) throw ValidationError("threads", "must be positive");
        if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("beta1", "must lie in [0,1)");
        if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("beta2", "must lie in [0,1)");
    }

    double rate_at(std::size_t epoch) const {
        switch (schedule) {
            case Schedule::Constant: return learning_rate;
            case Schedule::Exponential: return learning_rate * std::pow(decay, static_cast<double>(epoch));
            case Schedule::Step:
                return learning_rate * std::pow(decay, static_cast<double>(epoch / step_size));
        }
        return learning_rate;
    }
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
};

struct TrainResult {
    LayeredTransNN model;
    std::vector<EpochLog> history;
};

// ---------------------------------------------------------------------------
// Losses

inline void check_dataset(const LayeredTransNN& model, const Dataset& data, Loss loss) {
    if (data.empty()) throw ValidationError("dataset", "no samples");
    if (data.inputs.cols() != model.input_size()) {
        throw ValidationError("dataset", "input width " + std::to_string(data.inputs.cols()) +
                                             " does not match model input " + std::to_string(model.input_size()));
    }
    if (data.targets.rows() != data.inputs.rows()) throw ValidationError("dataset", "target row count mismatch");
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto x = data.input(i);
        const auto y = data.target(i);
        if (!std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }) ||
            !std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); })) {
            throw ValidationError("dataset row " + std::to_string(i), "non-finite value");
        }
    }
    if (loss == Loss::MSE && data.targets.cols() != model.output_size()) {
        throw ValidationError("dataset", "target width does not match model output");
    }
    if (loss == Loss::NLL) {
        if (model.head() != OutputHead::LogSoftmax) throw ValidationError("loss", "nll requires the log_softmax head");
        if (data.targets.cols() != 1) throw ValidationError("dataset", "nll targets must be one class-index column");
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double c = data.targets(i, 0);
            if (c < 0 || c != std::floor(c) || c >= static_cast<double>(model.output_size())) {
                throw ValidationError("dataset row " + std::to_string(i), "class label out of range");
            }
        }
    }
}

/// Per-sample loss and its gradient w.r.t. the model output.
inline double sample_loss(Loss loss, std::span<const double> output, std::span<const double> target,
                          Vector* grad = nullptr) {
    if (grad) grad->assign(output.size(), 0.0);
    if (loss == Loss::MSE) {
        double sum = 0.0;
        const double m = static_cast<double>(output.size());
        for (std::size_t k = 0; k < output.size(); ++k) {
            const double e = output[k] - target[k];
            sum += e * e;
            if (grad) (*grad)[k] = 2.0 * e / m;
        }
        return sum / m;
    }
    const auto c = static_cast<std::size_t>(target[0]);
    if (grad) (*grad)[c] = -1.0;
    return -output[c];
}

inline bool trainable_a(const Layer& l, const TrainConfig& cfg) { return l.train_a && (l.linear ? cfg.train_eta : cfg.train_a); }
inline bool trainable_w(const Layer& l, const TrainConfig& cfg) { return l.train_w && !l.linear && cfg.train_w; }
inline bool trainable_bias(const Layer& l, const TrainConfig& cfg) { return l.train_bias && cfg.train_bias; }

inline double regularizer(const LayeredTransNN& model, const TrainConfig& cfg) {
    if (cfg.l2 == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& l : model.layers()) {
        if (!trainable_a(l, cfg)) continue;
        for (double v : l.a.data()) sum += v * v;
    }
    return cfg.l2 * sum;
}

/// Mean data loss plus the regularizer.
inline double objective(const LayeredTransNN& model, const Dataset& data, const TrainConfig& cfg) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        sum += sample_loss(cfg.loss, predict(model, data.input(i)), data.target(i));
    }
    return sum / static_cast<double>(data.size()) + regularizer(model, cfg);
}

/// Mean loss and gradient of the objective over the given sample indices.
/// Per-sample gradients are summed in index order so the result does not
/// depend on the number of worker threads.
inline double batch_gradient(const LayeredTransNN& model, const Dataset& data, std::span<const std::size_t> idx,
                             const TrainConfig& cfg, Gradients& out) {
    const std::size_t n = idx.size();
    std::vector<Gradients> per(n);
    std::vector<double> losses(n, 0.0);
    auto work = [&](std::size_t lo, std::size_t hi) {
        Vector g;
        for (std::size_t s = lo; s < hi; ++s) {
            const Tape tape = forward(model, data.input(idx[s]));
            losses[s] = sample_loss(cfg.loss, tape.output, data.target(idx[s]), &g);
            per[s] = backward(model, tape, g);
        }
    };
    const std::size_t threads = std::min(cfg.threads, std::max<std::size_t>(n, 1));
    if (threads <= 1) {
        work(0, n);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (n + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
            if (lo < hi) pool.emplace_back(work, lo, hi);
        }
    }
    out = Gradients::zeros_like(model);
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    for (std::size_t s = 0; s < n; ++s) {
        out.add(per[s], inv);
        loss += losses[s];
    }
    loss *= inv;
    if (cfg.l2 != 0.0) {
        for (std::size_t k = 0; k < model.layers().size(); ++k) {
            const Layer& l = model.layers()[k];
            if (!trainable_a(l, cfg)) continue;
            for (std::size_t i = 0; i < l.a.size(); ++i) out.a[k].data()[i] += 2.0 * cfg.l2 * l.a.data()[i];
        }
        loss += regularizer(model, cfg);
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Optimizers

class Optimizer {
public:
    Optimizer(const LayeredTransNN& model, const TrainConfig& cfg)
        : cfg_(cfg), m_(Gradients::zeros_like(model)), v_(Gradients::zeros_like(model)) {}

    /// Applies one update and projects the levels back into [0,1].
    void step(LayeredTransNN& model, const Gradients& g, double lr) {
        ++t_;
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        auto update = [&](std::span<double> p, std::span<const double> gr, std::span<double> m, std::span<double> v) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (cfg_.optimizer == OptimizerKind::SGD) {
                    p[i] -= lr * gr[i];
                    continue;
                }
                m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * gr[i];
                v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * gr[i] * gr[i];
                p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.adam_epsilon);
            }
        };
        for (std::size_t k = 0; k < model.layers().size(); ++k) {
            Layer& l = model.layers()[k];
            if (trainable_a(l, cfg_)) update(l.a.data(), g.a[k].data(), m_.a[k].data(), v_.a[k].data());
            if (trainable_w(l, cfg_)) update(l.w.data(), g.w[k].data(), m_.w[k].data(), v_.w[k].data());
            if (trainable_bias(l, cfg_)) update(l.bias, g.bias[k], m_.bias[k], v_.bias[k]);
        }
        model.project();
    }

private:
    TrainConfig cfg_;
    Gradients m_;
    Gradients v_;
    std::size_t t_ = 0;
};

inline bool finite(const Gradients& g) {
    auto ok = [](std::span<const double> s) {
        return std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
    };
    for (std::size_t k = 0; k < g.a.size(); ++k) {
        if (!ok(g.a[k].data()) || !ok(g.w[k].data()) || !ok(g.bias[k])) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Training loop

/// Trains a copy of `initial`. The history records, for every epoch, the full
/// training objective and (if given) the validation objective after the
/// epoch's updates. Throws NumericalError naming the epoch and batch when a
/// loss or gradient turns non-finite.
inline TrainResult train(const LayeredTransNN& initial, const Dataset& data, const TrainConfig& cfg,
                         const Dataset* validation = nullptr) {
    cfg.validate();
    check_dataset(initial, data, cfg.loss);
    if (validation) check_dataset(initial, *validation, cfg.loss);

    TrainResult result{initial, {}};
    LayeredTransNN& model = result.model;
    Optimizer opt(model, cfg);
    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = cfg.batch_size == 0 ? data.size() : std::min(cfg.batch_size, data.size());

    Gradients g;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        const double lr = cfg.rate_at(epoch);
        for (std::size_t start = 0, b = 0; start < order.size(); start += batch, ++b) {
            const std::size_t stop = std::min(order.size(), start + batch);
            const double loss =
                batch_gradient(model, data, std::span<const std::size_t>(order).subspan(start, stop - start), cfg, g);
            if (!std::isfinite(loss) || !finite(g)) {
                throw NumericalError("epoch " + std::to_string(epoch + 1) + " batch " + std::to_string(b),
                                     "non-finite loss or gradient");
            }
            if (lr != 0.0) opt.step(model, g, lr);
        }
        EpochLog log{epoch + 1, objective(model, data, cfg), std::nullopt};
        if (!std::isfinite(log.train_loss)) {
            throw NumericalError("epoch " + std::to_string(epoch + 1), "non-finite training loss");
        }
        if (validation) log.val_loss = objective(model, *validation, cfg);
        result.history.push_back(log);
    }
    return result;
}

inline std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

/// Fraction of samples whose arg-max output equals the class label.
inline double accuracy(const LayeredTransNN& model, const Dataset& data) {
    if (data.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (argmax(predict(model, data.input(i))) == static_cast<std::size_t>(data.targets(i, 0))) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace transnn::learn
