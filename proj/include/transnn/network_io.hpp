#pragma once

// Network files.
//
// JSON:
//   {"n": 2, "kind": "single", "a": [[1,1],[1,1]], "w": [[0.5,0.5],[0.5,0.5]],
//    "modulation": {"mode": "global", "gamma": 0.8}}
// With a modulation block, "w" holds the inherent probabilities c and the
// effective link probabilities are derived from it. Supported modes:
// "none", "global" (gamma), "dual" (alpha, beta).
//
// CSV edge list:
//   # kind: single
//   # n: 3
//   src,dst,a,w
//   0,0,1,0.9
//   ...
// A row (src, dst, a, w) sets a[dst][src] = a and w[dst][src] = w, i.e. the
// link along which src infects dst. Self-loop rows are required for the
// epidemic kinds.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "transnn/network.hpp"

namespace transnn {

namespace detail {

inline Matrix json_to_matrix(const nlohmann::json& j, const std::string& name, std::size_t n) {
    if (!j.is_array() || j.size() != n) {
        throw ValidationError(name, "expected " + std::to_string(n) + " rows (matrix must be square n x n)");
    }
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || row.size() != n) {
            throw ValidationError(name + "[" + std::to_string(i) + "]",
                                  "expected " + std::to_string(n) + " columns (matrix must be square n x n)");
        }
        for (std::size_t c = 0; c < n; ++c) {
            if (!row[c].is_number()) throw ValidationError(entry_name(name, i, c), "not a number");
            m(i, c) = row[c].get<double>();
        }
    }
    return m;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
}

inline Vector json_to_vector(const nlohmann::json& j, const std::string& name) {
    if (!j.is_array()) throw ValidationError(name, "expected an array");
    Vector v;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ValidationError(name + "[" + std::to_string(i) + "]", "not a number");
        v.push_back(j[i].get<double>());
    }
    return v;
}

}  // namespace detail

inline TransmissionNetwork network_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ValidationError("", "network document must be a JSON object");
    for (const char* key : {"n", "kind", "a", "w"}) {
        if (!doc.contains(key)) throw ValidationError(key, "missing field");
    }
    if (!doc["n"].is_number_integer() || doc["n"].get<long long>() <= 0) {
        throw ValidationError("n", "must be a positive integer");
    }
    const auto n = doc["n"].get<std::size_t>();
    if (!doc["kind"].is_string()) throw ValidationError("kind", "must be a string");
    const NetworkKind kind = parse_network_kind(doc["kind"].get<std::string>());
    Matrix a = detail::json_to_matrix(doc["a"], "a", n);
    Matrix w = detail::json_to_matrix(doc["w"], "w", n);

    std::optional<Modulation> modulation;
    if (doc.contains("modulation") && !doc["modulation"].is_null()) {
        const auto& mj = doc["modulation"];
        if (!mj.is_object() || !mj.contains("mode") || !mj["mode"].is_string()) {
            throw ValidationError("modulation.mode", "missing or not a string");
        }
        const auto mode = mj["mode"].get<std::string>();
        Modulation m;
        m.base = w;
        if (mode == "none") {
            m.mode = std::monostate{};
        } else if (mode == "global") {
            if (!mj.contains("gamma") || !mj["gamma"].is_number()) {
                throw ValidationError("modulation.gamma", "missing or not a number");
            }
            m.mode = GlobalModulation{mj["gamma"].get<double>()};
        } else if (mode == "dual") {
            if (!mj.contains("alpha")) throw ValidationError("modulation.alpha", "missing field");
            if (!mj.contains("beta")) throw ValidationError("modulation.beta", "missing field");
            m.mode = DualNodalModulation{detail::json_to_vector(mj["alpha"], "modulation.alpha"),
                                         detail::json_to_vector(mj["beta"], "modulation.beta")};
        } else {
            throw ValidationError("modulation.mode", "unknown mode '" + mode + "'");
        }
        modulation = std::move(m);
    }
    return TransmissionNetwork(kind, std::move(a), std::move(w), std::move(modulation));
}

inline nlohmann::json network_to_json(const TransmissionNetwork& net) {
    nlohmann::json doc;
    doc["n"] = net.size();
    doc["kind"] = to_string(net.kind());
    doc["a"] = detail::matrix_to_json(net.a());
    if (const auto& m = net.modulation()) {
        doc["w"] = detail::matrix_to_json(m->base);
        nlohmann::json mj;
        if (std::holds_alternative<std::monostate>(m->mode)) {
            mj["mode"] = "none";
        } else if (const auto* g = std::get_if<GlobalModulation>(&m->mode)) {
            mj["mode"] = "global";
            mj["gamma"] = g->gamma;
        } else if (const auto* d = std::get_if<DualNodalModulation>(&m->mode)) {
            mj["mode"] = "dual";
            mj["alpha"] = d->alpha;
            mj["beta"] = d->beta;
        }
        doc["modulation"] = mj;
    } else {
        doc["w"] = detail::matrix_to_json(net.w());
    }
    return doc;
}

inline TransmissionNetwork read_network_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<NetworkKind> kind;
    std::optional<std::size_t> declared_n;
    bool header_seen = false;
    struct Row {
        std::size_t src, dst;
        double a, w;
        std::size_t line;
    };
    std::vector<Row> rows;
    auto field = [&](std::size_t no) { return "line " + std::to_string(no); };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream meta(line.substr(1));
            std::string key, value;
            meta >> key >> value;
            if (key == "kind:") kind = parse_network_kind(value);
            else if (key == "n:") declared_n = static_cast<std::size_t>(std::stoul(value));
            continue;
        }
        if (!header_seen) {
            if (line != "src,dst,a,w") throw ValidationError(field(line_no), "expected header 'src,dst,a,w'");
            header_seen = true;
            continue;
        }
        std::istringstream ls(line);
        std::string cell[4];
        for (int c = 0; c < 4; ++c) {
            if (!std::getline(ls, cell[c], ',')) throw ValidationError(field(line_no), "expected 4 columns");
        }
        try {
            const long long src = std::stoll(cell[0]);
            const long long dst = std::stoll(cell[1]);
            if (src < 0 || dst < 0) throw ValidationError(field(line_no), "negative node index");
            rows.push_back({static_cast<std::size_t>(src), static_cast<std::size_t>(dst), std::stod(cell[2]),
                            std::stod(cell[3]), line_no});
        } catch (const std::logic_error&) {
            throw ValidationError(field(line_no), "malformed number");
        }
    }
    if (!header_seen) throw ValidationError("header", "missing 'src,dst,a,w' header");
    std::size_t n = declared_n.value_or(0);
    for (const Row& r : rows) n = std::max(n, std::max(r.src, r.dst) + 1);
    if (n == 0) throw ValidationError("n", "empty network");
    Matrix a(n, n), w(n, n);
    for (const Row& r : rows) {
        if (declared_n && (r.src >= *declared_n || r.dst >= *declared_n)) {
            throw ValidationError(field(r.line), "node index exceeds declared n");
        }
        if (!(r.w >= 0.0 && r.w <= 1.0)) {
            throw ValidationError(field(r.line) + " " + entry_name("w", r.dst, r.src),
                                  "link probability outside [0,1]");
        }
        a(r.dst, r.src) = r.a;
        w(r.dst, r.src) = r.w;
    }
    return TransmissionNetwork(kind.value_or(NetworkKind::SingleParticle), std::move(a), std::move(w));
}

inline void write_network_csv(std::ostream& out, const TransmissionNetwork& net) {
    out << "# kind: " << to_string(net.kind()) << '\n';
    out << "# n: " << net.size() << '\n';
    out << "src,dst,a,w\n" << std::setprecision(17);
    for (std::size_t dst = 0; dst < net.size(); ++dst) {
        for (std::size_t src = 0; src < net.size(); ++src) {
            if (net.a()(dst, src) != 0.0 || net.w()(dst, src) != 0.0) {
                out << src << ',' << dst << ',' << net.a()(dst, src) << ',' << net.w()(dst, src) << '\n';
            }
        }
    }
}

/// Loads a network from `.json` or `.csv` (by extension).
inline TransmissionNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    if (path.extension() == ".csv") return read_network_csv(in);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + " byte " + std::to_string(e.byte), "malformed JSON");
    }
    return network_from_json(doc);
}

inline void save_network(const TransmissionNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    if (path.extension() == ".csv") {
        write_network_csv(out, net);
    } else {
        out << network_to_json(net).dump(2) << '\n';
    }
}

}  // namespace transnn
