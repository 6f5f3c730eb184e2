#pragma once

// Model checkpoints (JSON) and training logs (CSV).
//
// Checkpoint layout:
//   {"format": "transnn-checkpoint", "version": 1,
//    "activation": "psi", "head": "identity", "seed": 7, "fixed_bias": null,
//    "layer_sizes": [2, 16, 2],
//    "layers": [{"inputs": 2, "outputs": 16, "sharing": "per_link", "linear": false,
//                "train": {"a": true, "w": true, "bias": true},
//                "a": [...], "w": [...], "bias": [...]}, ...]}
// Parameter arrays are flattened row-major. Doubles are written with
// round-trip precision, so save/load is bit-exact.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transnn/learn/model.hpp"
#include "transnn/learn/train.hpp"

namespace transnn::learn {

inline nlohmann::json to_json(const LayeredTransNN& model) {
    nlohmann::json doc;
    doc["format"] = "transnn-checkpoint";
    doc["version"] = 1;
    doc["activation"] = std::string(to_string(model.activation()));
    doc["head"] = std::string(to_string(model.head()));
    doc["seed"] = model.seed();
    doc["fixed_bias"] = model.fixed_bias() ? nlohmann::json(*model.fixed_bias()) : nlohmann::json(nullptr);
    doc["layer_sizes"] = model.layer_sizes();
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& l : model.layers()) {
        layers.push_back({{"inputs", l.inputs()},
                          {"outputs", l.outputs()},
                          {"sharing", l.sharing == LevelSharing::PerLink ? "per_link" : "per_source"},
                          {"linear", l.linear},
                          {"train", {{"a", l.train_a}, {"w", l.train_w}, {"bias", l.train_bias}}},
                          {"a", l.a.data()},
                          {"w", l.w.data()},
                          {"bias", l.bias}});
    }
    doc["layers"] = layers;
    return doc;
}

inline LayeredTransNN model_from_json(const nlohmann::json& doc) {
    try {
        if (doc.value("format", "") != "transnn-checkpoint") throw ValidationError("format", "not a transnn checkpoint");
        std::vector<Layer> layers;
        const auto& lj = doc.at("layers");
        for (std::size_t k = 0; k < lj.size(); ++k) {
            const auto& j = lj[k];
            const std::string where = "layers[" + std::to_string(k) + "]";
            Layer l;
            const auto in = j.at("inputs").get<std::size_t>(), out = j.at("outputs").get<std::size_t>();
            const auto sharing = j.at("sharing").get<std::string>();
            if (sharing == "per_link") l.sharing = LevelSharing::PerLink;
            else if (sharing == "per_source") l.sharing = LevelSharing::PerSource;
            else throw ValidationError(where + ".sharing", "unknown value '" + sharing + "'");
            l.linear = j.at("linear").get<bool>();
            l.train_a = j.at("train").at("a").get<bool>();
            l.train_w = j.at("train").at("w").get<bool>();
            l.train_bias = j.at("train").at("bias").get<bool>();
            l.a = Matrix(out, in);
            l.w = Matrix(l.sharing == LevelSharing::PerLink ? out : 1, in);
            auto a = j.at("a").get<std::vector<double>>();
            auto w = j.at("w").get<std::vector<double>>();
            l.bias = j.at("bias").get<std::vector<double>>();
            if (a.size() != l.a.size()) throw ValidationError(where + ".a", "wrong number of entries");
            if (w.size() != l.w.size()) throw ValidationError(where + ".w", "wrong number of entries");
            l.a.data() = std::move(a);
            l.w.data() = std::move(w);
            layers.push_back(std::move(l));
        }
        std::optional<double> fixed;
        if (doc.contains("fixed_bias") && !doc["fixed_bias"].is_null()) fixed = doc["fixed_bias"].get<double>();
        return LayeredTransNN(std::move(layers), parse_activation_kind(doc.at("activation").get<std::string>()),
                              parse_output_head(doc.at("head").get<std::string>()), fixed,
                              doc.value("seed", std::uint64_t{0}));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("checkpoint", e.what());
    } catch (const std::invalid_argument& e) {
        throw ValidationError("checkpoint", e.what());
    }
}

inline void save_checkpoint(const LayeredTransNN& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(model).dump(2) << '\n';
}

inline LayeredTransNN load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + " byte " + std::to_string(e.byte), "malformed JSON");
    }
    return model_from_json(doc);
}

/// CSV `epoch,train_loss,val_loss`; val_loss is empty when absent.
inline void write_training_log(std::ostream& out, const std::vector<EpochLog>& history) {
    out << "epoch,train_loss,val_loss\n" << std::setprecision(17);
    for (const auto& e : history) {
        out << e.epoch << ',' << e.train_loss << ',';
        if (e.val_loss) out << *e.val_loss;
        out << '\n';
    }
}

}  // namespace transnn::learn
