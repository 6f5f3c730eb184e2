#pragma once

// Plumbing for the command-line driver: initial-condition specs, run
// manifests, file hashing, tabular output and gnuplot scripts.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "transnn/network.hpp"
#include "transnn/types.hpp"

namespace transnn::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kNumerical = 3, kNonConvergence = 4 };

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses the initial-condition mini-language: comma-separated tokens applied
/// left to right, each one of
///   all=v                 every node set to v
///   node:i=v              node i set to v
///   uniform-random(seed)  every node drawn uniformly from [0,1]
/// Nodes not covered by any token start at 0.
inline ProbabilityState parse_p0(const std::string& spec, std::size_t n) {
    Vector p(n, 0.0);
    auto value = [&](const std::string& text, const std::string& token) {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("p0 '" + token + "'", "probability outside [0,1]");
            return v;
        } catch (const std::logic_error&) {
            throw ValidationError("p0 '" + token + "'", "malformed number");
        }
    };
    std::istringstream in(spec);
    std::string token;
    bool any = false;
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        any = true;
        if (token.rfind("all=", 0) == 0) {
            const double v = value(token.substr(4), token);
            std::fill(p.begin(), p.end(), v);
        } else if (token.rfind("node:", 0) == 0) {
            const auto eq = token.find('=');
            if (eq == std::string::npos) throw ValidationError("p0 '" + token + "'", "expected node:i=v");
            std::size_t idx = 0;
            try {
                std::size_t used = 0;
                const std::string idx_text = token.substr(5, eq - 5);
                const long long i = std::stoll(idx_text, &used);
                if (used != idx_text.size() || i < 0) throw std::invalid_argument(idx_text);
                idx = static_cast<std::size_t>(i);
            } catch (const std::logic_error&) {
                throw ValidationError("p0 '" + token + "'", "malformed node index");
            }
            if (idx >= n) {
                throw ValidationError("p0 '" + token + "'", "node index out of range (n = " + std::to_string(n) + ")");
            }
            p[idx] = value(token.substr(eq + 1), token);
        } else if (token.rfind("uniform-random(", 0) == 0 && token.back() == ')') {
            const std::string inner = token.substr(15, token.size() - 16);
            std::uint64_t seed = 0;
            try {
                std::size_t used = 0;
                seed = std::stoull(inner, &used);
                if (used != inner.size()) throw std::invalid_argument(inner);
            } catch (const std::logic_error&) {
                throw ValidationError("p0 '" + token + "'", "malformed seed");
            }
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (double& v : p) v = u(rng);
        } else {
            throw ValidationError("p0 '" + token + "'", "unknown token (expected all=v, node:i=v or uniform-random(seed))");
        }
    }
    if (!any) throw ValidationError("p0", "empty specification");
    return ProbabilityState(std::move(p));
}

inline std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(path.string(), "cannot open file");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

struct Manifest {
    std::vector<std::string> argv;
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["tool"] = "transnn";
        j["version"] = TRANSNN_VERSION;
        j["command"] = command;
        j["argv"] = argv;
        j["config"] = config;
        j["seed"] = seed;
        nlohmann::json in = nlohmann::json::array();
        for (const auto& p : inputs) in.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
        j["inputs"] = in;
        nlohmann::json out = nlohmann::json::array();
        for (const auto& p : outputs) out.push_back(p.string());
        j["outputs"] = out;
        return j;
    }
};

/// Creates the output directory and writes manifest.json into it.
inline void write_manifest(const fs::path& dir, const Manifest& m) {
    fs::create_directories(dir);
    std::ofstream out(dir / "manifest.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << m.to_json().dump(2) << '\n';
}

inline std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

/// Column-oriented numeric table written as CSV or as a JSON array of rows.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write(const fs::path& path, bool json) const {
        auto out = open_output(path);
        if (json) {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto& r : rows) {
                nlohmann::json obj;
                for (std::size_t c = 0; c < columns.size(); ++c) {
                    if (std::isnan(r[c])) obj[columns[c]] = nullptr;
                    else if (std::isinf(r[c])) obj[columns[c]] = r[c] > 0 ? "inf" : "-inf";
                    else obj[columns[c]] = r[c];
                }
                arr.push_back(obj);
            }
            out << arr.dump(2) << '\n';
            return;
        }
        for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
        out << '\n' << std::setprecision(17);
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < r.size(); ++c) {
                if (c) out << ',';
                if (std::isnan(r[c])) out << "nan";
                else out << r[c];
            }
            out << '\n';
        }
    }
};

struct PlotSpec {
    std::string title;
    std::string xlabel;
    std::string ylabel;
    bool logx = false;
    bool logy = false;
};

/// Gnuplot script plotting columns `ycols` (1-based) of a CSV against column
/// `xcol`. When `group_col` is nonzero, one curve per distinct value of that
/// column is drawn (e.g. one curve per node).
inline void write_gnuplot(const fs::path& script, const fs::path& data, const PlotSpec& spec, int xcol,
                          const std::vector<std::pair<int, std::string>>& ycols, int group_col = 0,
                          std::size_t groups = 0) {
    auto out = open_output(script);
    out << "# gnuplot script; run: gnuplot " << script.filename().string() << '\n';
    out << "set datafile separator ','\n";
    out << "set key autotitle columnhead\n";
    out << "set terminal pngcairo size 900,600\n";
    out << "set output '" << script.stem().string() << ".png'\n";
    out << "set title '" << spec.title << "'\n";
    out << "set xlabel '" << spec.xlabel << "'\nset ylabel '" << spec.ylabel << "'\n";
    if (spec.logx) out << "set logscale x\n";
    if (spec.logy) out << "set logscale y\n";
    const std::string file = data.filename().string();
    out << "plot ";
    bool first = true;
    if (group_col > 0) {
        for (std::size_t g = 0; g < groups; ++g) {
            for (const auto& [col, name] : ycols) {
                out << (first ? "" : ", \\\n     ") << "'" << file << "' using " << xcol << ":($" << group_col
                    << "==" << g << " ? $" << col << " : 1/0) with lines title '" << name << " " << g << "'";
                first = false;
            }
        }
    } else {
        for (const auto& [col, name] : ycols) {
            out << (first ? "" : ", \\\n     ") << "'" << file << "' using " << xcol << ':' << col
                << " with linespoints title '" << name << "'";
            first = false;
        }
    }
    out << '\n';
}

inline std::vector<double> parse_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::logic_error&) {
            throw ValidationError(field, "malformed number '" + tok + "'");
        }
    }
    if (out.empty()) throw ValidationError(field, "empty list");
    return out;
}

}  // namespace transnn::cli
