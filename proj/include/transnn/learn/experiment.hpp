#pragma once

// Training configuration files and the activation-comparison experiment.
//
// Config JSON (every field optional):
//   {"model": {"hidden": [16], "activation": "psi", "head": "log_softmax",
//              "linear_input": true, "level": 0.5, "bias": 1.0, "trainable_w": true},
//    "train": {"loss": "nll", "optimizer": "adam", "learning_rate": 0.01,
//              "schedule": "constant", "decay": 1.0, "step_size": 10,
//              "epochs": 300, "batch_size": 32, "l2": 0.0, "threads": 1,
//              "train_a": true, "train_w": true, "train_eta": true, "train_bias": true},
//    "validation_fraction": 0.0, "seed": 0}

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "transnn/learn/model.hpp"
#include "transnn/learn/train.hpp"

namespace transnn::learn {

struct ModelSpec {
    std::vector<std::size_t> hidden{16};
    ActivationKind activation = ActivationKind::TLogSigmoid;
    OutputHead head = OutputHead::LogSoftmax;
    bool linear_input = true;
    double level = 0.5;
    double bias = 1.0;
    bool trainable_w = true;
};

struct ExperimentConfig {
    ModelSpec model;
    TrainConfig train;
    double validation_fraction = 0.0;
    std::optional<std::uint64_t> seed;
};

/// Defaults used for the two-cluster classification task.
inline ExperimentConfig default_classification_config() {
    ExperimentConfig cfg;
    cfg.train.loss = Loss::NLL;
    cfg.train.optimizer = OptimizerKind::Adam;
    cfg.train.learning_rate = 0.01;
    cfg.train.epochs = 300;
    cfg.train.batch_size = 32;
    return cfg;
}

inline LayeredTransNN build_model(const ModelSpec& spec, std::size_t inputs, std::size_t outputs,
                                  std::uint64_t seed) {
    std::vector<std::size_t> sizes{inputs};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(outputs);
    InitOptions init;
    init.level = spec.level;
    init.bias = spec.bias;
    init.linear_input = spec.linear_input;
    LayeredTransNN model = make_feedforward(sizes, spec.activation, spec.head, seed, init);
    if (!spec.trainable_w) {
        for (auto& l : model.layers()) l.train_w = false;
    }
    return model;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& doc) {
    ExperimentConfig cfg = default_classification_config();
    auto field = [](const std::string& path, auto fn) {
        try {
            fn();
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path, e.what());
        } catch (const std::invalid_argument& e) {
            throw ValidationError(path, e.what());
        }
    };
    auto known = [](const nlohmann::json& obj, const std::string& prefix, std::initializer_list<std::string_view> keys) {
        if (!obj.is_object()) throw ValidationError(prefix.empty() ? "config" : prefix, "must be a JSON object");
        for (const auto& [key, value] : obj.items()) {
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                throw ValidationError(prefix.empty() ? key : prefix + "." + key, "unknown field");
            }
        }
    };
    known(doc, "", {"model", "train", "validation_fraction", "seed"});
    if (doc.contains("model")) {
        const auto& m = doc["model"];
        known(m, "model", {"hidden", "activation", "head", "linear_input", "level", "bias", "trainable_w"});
        ModelSpec& s = cfg.model;
        if (m.contains("hidden")) field("model.hidden", [&] { s.hidden = m["hidden"].get<std::vector<std::size_t>>(); });
        if (m.contains("activation"))
            field("model.activation", [&] { s.activation = parse_activation_kind(m["activation"].get<std::string>()); });
        if (m.contains("head")) field("model.head", [&] { s.head = parse_output_head(m["head"].get<std::string>()); });
        if (m.contains("linear_input")) field("model.linear_input", [&] { s.linear_input = m["linear_input"].get<bool>(); });
        if (m.contains("level")) field("model.level", [&] { s.level = m["level"].get<double>(); });
        if (m.contains("bias")) field("model.bias", [&] { s.bias = m["bias"].get<double>(); });
        if (m.contains("trainable_w")) field("model.trainable_w", [&] { s.trainable_w = m["trainable_w"].get<bool>(); });
        if (!(s.level >= 0.0 && s.level <= 1.0)) throw ValidationError("model.level", "must lie in [0,1]");
        for (std::size_t h : s.hidden)
            if (h == 0) throw ValidationError("model.hidden", "layer widths must be positive");
    }
    if (doc.contains("train")) {
        const auto& t = doc["train"];
        known(t, "train", {"loss", "optimizer", "schedule", "learning_rate", "decay", "step_size", "epochs",
                           "batch_size", "l2", "threads", "train_a", "train_w", "train_eta", "train_bias"});
        TrainConfig& c = cfg.train;
        if (t.contains("loss")) field("train.loss", [&] { c.loss = parse_loss(t["loss"].get<std::string>()); });
        if (t.contains("optimizer")) field("train.optimizer", [&] { c.optimizer = parse_optimizer(t["optimizer"].get<std::string>()); });
        if (t.contains("schedule")) field("train.schedule", [&] { c.schedule = parse_schedule(t["schedule"].get<std::string>()); });
        if (t.contains("learning_rate")) field("train.learning_rate", [&] { c.learning_rate = t["learning_rate"].get<double>(); });
        if (t.contains("decay")) field("train.decay", [&] { c.decay = t["decay"].get<double>(); });
        if (t.contains("step_size")) field("train.step_size", [&] { c.step_size = t["step_size"].get<std::size_t>(); });
        if (t.contains("epochs")) field("train.epochs", [&] { c.epochs = t["epochs"].get<std::size_t>(); });
        if (t.contains("batch_size")) field("train.batch_size", [&] { c.batch_size = t["batch_size"].get<std::size_t>(); });
        if (t.contains("l2")) field("train.l2", [&] { c.l2 = t["l2"].get<double>(); });
        if (t.contains("threads")) field("train.threads", [&] { c.threads = t["threads"].get<std::size_t>(); });
        if (t.contains("train_a")) field("train.train_a", [&] { c.train_a = t["train_a"].get<bool>(); });
        if (t.contains("train_w")) field("train.train_w", [&] { c.train_w = t["train_w"].get<bool>(); });
        if (t.contains("train_eta")) field("train.train_eta", [&] { c.train_eta = t["train_eta"].get<bool>(); });
        if (t.contains("train_bias")) field("train.train_bias", [&] { c.train_bias = t["train_bias"].get<bool>(); });
        c.validate();
    }
    if (doc.contains("validation_fraction"))
        field("validation_fraction", [&] { cfg.validation_fraction = doc["validation_fraction"].get<double>(); });
    if (doc.contains("seed")) field("seed", [&] { cfg.seed = doc["seed"].get<std::uint64_t>(); });
    return cfg;
}

inline nlohmann::json to_json(const ExperimentConfig& cfg) {
    const auto& m = cfg.model;
    const auto& t = cfg.train;
    nlohmann::json doc;
    doc["model"] = {{"hidden", m.hidden},
                    {"activation", std::string(to_string(m.activation))},
                    {"head", std::string(to_string(m.head))},
                    {"linear_input", m.linear_input},
                    {"level", m.level},
                    {"bias", m.bias},
                    {"trainable_w", m.trainable_w}};
    doc["train"] = {{"loss", std::string(to_string(t.loss))},
                    {"optimizer", std::string(to_string(t.optimizer))},
                    {"learning_rate", t.learning_rate},
                    {"schedule", std::string(to_string(t.schedule))},
                    {"decay", t.decay},
                    {"step_size", t.step_size},
                    {"epochs", t.epochs},
                    {"batch_size", t.batch_size},
                    {"l2", t.l2},
                    {"threads", t.threads},
                    {"train_a", t.train_a},
                    {"train_w", t.train_w},
                    {"train_eta", t.train_eta},
                    {"train_bias", t.train_bias}};
    doc["validation_fraction"] = cfg.validation_fraction;
    doc["seed"] = cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json(nullptr);
    return doc;
}

// ---------------------------------------------------------------------------
// Activation comparison

struct ComparisonVariant {
    std::string name;
    ActivationKind activation;
    double level;
    bool trainable_w;
};

/// TPsi and TPhi train their levels; the fixed variants hold w at 0.5, and
/// the ReLU-equivalent variant is Psi_plus with w held at 1.
inline std::vector<ComparisonVariant> comparison_variants() {
    return {{"TPsi", ActivationKind::TLogSigmoid, 0.5, true},
            {"TPhi", ActivationKind::TSoftAffine, 0.5, true},
            {"fixed-Psi", ActivationKind::TLogSigmoid, 0.5, false},
            {"fixed-Phi", ActivationKind::TSoftAffine, 0.5, false},
            {"relu-equivalent", ActivationKind::TLogSigmoidPlus, 1.0, false}};
}

struct ComparisonResult {
    std::vector<std::string> names;
    std::vector<std::vector<double>> losses;  // [variant][epoch]
    std::vector<double> accuracy;             // final training accuracy per variant
};

inline ComparisonResult compare_activations(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
    ComparisonResult res;
    const auto outputs = static_cast<std::size_t>(
        cfg.train.loss == Loss::NLL ? [&] {
            double mx = 0;
            for (std::size_t i = 0; i < data.size(); ++i) mx = std::max(mx, data.targets(i, 0));
            return mx + 1;
        }()
                                    : static_cast<double>(data.targets.cols()));
    for (const auto& v : comparison_variants()) {
        ModelSpec spec = cfg.model;
        spec.activation = v.activation;
        spec.level = v.level;
        spec.trainable_w = v.trainable_w;
        const LayeredTransNN model = build_model(spec, data.inputs.cols(), outputs, seed);
        TrainConfig tc = cfg.train;
        tc.seed = seed;
        const TrainResult r = train(model, data, tc);
        std::vector<double> curve;
        for (const auto& e : r.history) curve.push_back(e.train_loss);
        res.names.push_back(v.name);
        res.losses.push_back(std::move(curve));
        res.accuracy.push_back(tc.loss == Loss::NLL ? accuracy(r.model, data) : 0.0);
    }
    return res;
}

/// CSV `epoch,TPsi,TPhi,fixed-Psi,fixed-Phi,relu-equivalent`.
inline void write_comparison_csv(std::ostream& out, const ComparisonResult& res) {
    out << "epoch";
    for (const auto& n : res.names) out << ',' << n;
    out << '\n' << std::setprecision(17);
    const std::size_t epochs = res.losses.empty() ? 0 : res.losses.front().size();
    for (std::size_t e = 0; e < epochs; ++e) {
        out << e + 1;
        for (const auto& curve : res.losses) out << ',' << curve[e];
        out << '\n';
    }
}

}  // namespace transnn::learn
