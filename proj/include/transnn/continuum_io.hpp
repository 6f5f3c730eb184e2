#pragma once

// Rate files for the continuous-time model.
//
//   {"n": 3, "model": "single", "adjacency": [[0,1,0],[1,0,1],[0,1,0]],
//    "c": [[0.5,0.3,0],[0.2,0.4,0.1],[0,0.6,0.3]]}
//   {"n": 2, "model": "multi", "c": [...], "kappa": [...], "epsilon": 0.5}
// "adjacency" is optional for the single-particle model; when absent the
// off-diagonal support of c is used.

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "transnn/continuum.hpp"
#include "transnn/network_io.hpp"

namespace transnn {

struct RateSystem {
    ContinuousRates rates;
    Matrix adjacency;
};

inline Matrix support_adjacency(const Matrix& c) {
    Matrix adj(c.rows(), c.cols());
    for (std::size_t i = 0; i < c.rows(); ++i)
        for (std::size_t j = 0; j < c.cols(); ++j) adj(i, j) = (i != j && c(i, j) != 0.0) ? 1.0 : 0.0;
    return adj;
}

inline RateSystem rates_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("", "rates document must be a JSON object");
    if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<long long>() <= 0) {
        throw ValidationError("n", "missing or not a positive integer");
    }
    const auto n = doc["n"].get<std::size_t>();
    const std::string model = doc.value("model", std::string("single"));
    if (model != "single" && model != "multi") throw ValidationError("model", "must be 'single' or 'multi'");
    if (!doc.contains("c")) throw ValidationError("c", "missing field");
    RateSystem sys;
    sys.rates.c = detail::json_to_matrix(doc["c"], "c", n);
    if (model == "multi") {
        if (!doc.contains("kappa")) throw ValidationError("kappa", "required for the multi model");
        sys.rates.kappa = detail::json_to_matrix(doc["kappa"], "kappa", n);
        if (doc.contains("epsilon")) {
            if (!doc["epsilon"].is_number()) throw ValidationError("epsilon", "not a number");
            sys.rates.epsilon = doc["epsilon"].get<double>();
        }
    }
    validate_rates(sys.rates);
    if (doc.contains("adjacency")) {
        sys.adjacency = detail::json_to_matrix(doc["adjacency"], "adjacency", n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (sys.adjacency(i, j) != 0.0 && sys.adjacency(i, j) != 1.0)
                    throw ValidationError(entry_name("adjacency", i, j), "must be 0 or 1");
    } else {
        sys.adjacency = support_adjacency(sys.rates.c);
    }
    return sys;
}

inline nlohmann::json rates_to_json(const RateSystem& sys) {
    nlohmann::json doc;
    doc["n"] = sys.rates.size();
    doc["model"] = sys.rates.multi() ? "multi" : "single";
    doc["c"] = detail::matrix_to_json(sys.rates.c);
    if (sys.rates.multi()) {
        doc["kappa"] = detail::matrix_to_json(sys.rates.kappa);
        doc["epsilon"] = sys.rates.epsilon;
    } else {
        doc["adjacency"] = detail::matrix_to_json(sys.adjacency);
    }
    return doc;
}

inline RateSystem load_rates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + " byte " + std::to_string(e.byte), "malformed JSON");
    }
    return rates_from_json(doc);
}

}  // namespace transnn
