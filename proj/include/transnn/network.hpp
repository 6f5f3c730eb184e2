#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "transnn/types.hpp"

namespace transnn {

enum class NetworkKind { EffectiveAdjacency, SingleParticle, MultiParticle, GeneralReal };

inline std::string_view to_string(NetworkKind kind) {
    switch (kind) {
        case NetworkKind::EffectiveAdjacency: return "effective";
        case NetworkKind::SingleParticle: return "single";
        case NetworkKind::MultiParticle: return "multi";
        case NetworkKind::GeneralReal: return "general";
    }
    return "single";
}

inline NetworkKind parse_network_kind(std::string_view name) {
    if (name == "effective") return NetworkKind::EffectiveAdjacency;
    if (name == "single") return NetworkKind::SingleParticle;
    if (name == "multi") return NetworkKind::MultiParticle;
    if (name == "general") return NetworkKind::GeneralReal;
    throw ValidationError("kind", "unknown network kind '" + std::string(name) + "'");
}

inline bool is_epidemic(NetworkKind kind) { return kind != NetworkKind::GeneralReal; }

inline std::string entry_name(std::string_view matrix, std::size_t i, std::size_t j) {
    return std::string(matrix) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]";
}

// ---------------------------------------------------------------------------
// Nodal states

inline constexpr double kSnapToOne = 1e-15;

class ProbabilityState {
public:
    ProbabilityState() = default;
    explicit ProbabilityState(Vector p) : p_(std::move(p)) {
        for (std::size_t i = 0; i < p_.size(); ++i) {
            if (!(p_[i] >= 0.0 && p_[i] <= 1.0)) {
                throw DomainError("p[" + std::to_string(i) + "]=" + std::to_string(p_[i]) +
                                  " outside [0,1]");
            }
        }
    }
    static ProbabilityState zeros(std::size_t n) { return ProbabilityState(Vector(n, 0.0)); }

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    const Vector& values() const noexcept { return p_; }
    double max() const {
        double m = 0.0;
        for (double v : p_) m = std::max(m, v);
        return m;
    }
    bool operator==(const ProbabilityState&) const = default;

private:
    Vector p_;
};

class InfoState {
public:
    InfoState() = default;
    explicit InfoState(Vector s) : s_(std::move(s)) {
        for (std::size_t i = 0; i < s_.size(); ++i) {
            if (!(s_[i] >= 0.0)) {
                throw DomainError("s[" + std::to_string(i) + "]=" + std::to_string(s_[i]) +
                                  " is negative or NaN");
            }
        }
    }
    static InfoState zeros(std::size_t n) { return InfoState(Vector(n, 0.0)); }

    std::size_t size() const noexcept { return s_.size(); }
    double operator[](std::size_t i) const { return s_[i]; }
    const Vector& values() const noexcept { return s_; }
    bool operator==(const InfoState&) const = default;

private:
    Vector s_;
};

/// s_i = -log(1 - p_i); p within 1e-15 of one maps to +inf.
inline double prob_to_info(double p) {
    if (p >= 1.0 - kSnapToOne) return kInfinity;
    return -std::log1p(-p);
}

inline double info_to_prob(double s) { return -std::expm1(-s); }

inline InfoState prob_to_info(const ProbabilityState& p) {
    Vector s(p.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = prob_to_info(p[i]);
    return InfoState(std::move(s));
}

inline ProbabilityState info_to_prob(const InfoState& s) {
    Vector p(s.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = info_to_prob(s[i]);
    return ProbabilityState(std::move(p));
}

/// Checked conversion for raw vectors; negative entries are rejected.
inline ProbabilityState info_to_prob(std::span<const double> s) {
    return info_to_prob(InfoState(Vector(s.begin(), s.end())));
}

// ---------------------------------------------------------------------------
// Modulation of link probabilities

struct GlobalModulation {
    double gamma = 1.0;
    bool operator==(const GlobalModulation&) const = default;
};

struct DualNodalModulation {
    Vector alpha;  // postsynaptic (receiving node h)
    Vector beta;   // presynaptic (sending node q)
    bool operator==(const DualNodalModulation&) const = default;
};

using ModulationMode = std::variant<std::monostate, GlobalModulation, DualNodalModulation>;

struct Modulation {
    ModulationMode mode;
    Matrix base;  // inherent link probabilities c, entries in [0,1]
    bool operator==(const Modulation&) const = default;
};

inline void validate_modulation(const Modulation& m) {
    if (!m.base.square()) throw ValidationError("modulation.base", "matrix is not square");
    for (std::size_t i = 0; i < m.base.rows(); ++i) {
        for (std::size_t j = 0; j < m.base.cols(); ++j) {
            const double c = m.base(i, j);
            if (!(c >= 0.0 && c <= 1.0)) {
                throw ValidationError(entry_name("w", i, j), "base probability outside [0,1]");
            }
        }
    }
    auto check_unit = [](double v, const std::string& field) {
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(field, "value outside [0,1]");
    };
    if (const auto* g = std::get_if<GlobalModulation>(&m.mode)) {
        check_unit(g->gamma, "modulation.gamma");
    } else if (const auto* d = std::get_if<DualNodalModulation>(&m.mode)) {
        const std::size_t n = m.base.rows();
        if (d->alpha.size() != n) throw ValidationError("modulation.alpha", "length != n");
        if (d->beta.size() != n) throw ValidationError("modulation.beta", "length != n");
        for (std::size_t i = 0; i < n; ++i) {
            check_unit(d->alpha[i], "modulation.alpha[" + std::to_string(i) + "]");
            check_unit(d->beta[i], "modulation.beta[" + std::to_string(i) + "]");
        }
    }
}

/// Effective link probabilities: c, gamma*c, or diag(alpha) c diag(beta).
inline Matrix apply_modulation(const Modulation& m) {
    validate_modulation(m);
    Matrix w = m.base;
    if (const auto* g = std::get_if<GlobalModulation>(&m.mode)) {
        for (double& v : w.data()) v *= g->gamma;
    } else if (const auto* d = std::get_if<DualNodalModulation>(&m.mode)) {
        for (std::size_t h = 0; h < w.rows(); ++h) {
            for (std::size_t q = 0; q < w.cols(); ++q) w(h, q) = d->alpha[h] * w(h, q) * d->beta[q];
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Transmission network

// Networks with more than this fraction of zero links get a compressed
// neighbour list used by the step operations.
inline constexpr double kSparseZeroFraction = 0.05;
inline constexpr std::size_t kDenseNodeLimit = 2048;

enum class Storage { Dense, Sparse };

// Row-wise compressed list of links with a_ij != 0.
struct NeighbourLists {
    std::vector<std::size_t> row_start;  // size n+1
    std::vector<std::size_t> col;
    bool empty() const noexcept { return row_start.empty(); }
};

class TransmissionNetwork {
public:
    TransmissionNetwork() = default;

    /// Validates every invariant for `kind`; throws ValidationError naming the
    /// first offending entry.
    TransmissionNetwork(NetworkKind kind, Matrix a, Matrix w,
                        std::optional<Modulation> modulation = std::nullopt)
        : kind_(kind), a_(std::move(a)), w_(std::move(w)), modulation_(std::move(modulation)) {
        if (modulation_) {
            validate_modulation(*modulation_);
            w_ = apply_modulation(*modulation_);
        }
        validate();
        build_storage();
    }

    NetworkKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return a_.rows(); }
    const Matrix& a() const noexcept { return a_; }
    const Matrix& w() const noexcept { return w_; }
    const std::optional<Modulation>& modulation() const noexcept { return modulation_; }
    Storage storage() const noexcept { return neighbours_.empty() ? Storage::Dense : Storage::Sparse; }
    const NeighbourLists& neighbours() const noexcept { return neighbours_; }

    /// True when every a entry is an integer (exact multi-particle counts).
    bool integral_counts() const noexcept { return integral_; }

    /// Visits (j, a_ij, w_ij) for every link into node i with a_ij != 0.
    template <typename F>
    void for_each_link(std::size_t i, F&& f) const {
        if (neighbours_.empty()) {
            for (std::size_t j = 0; j < a_.cols(); ++j) {
                const double aij = a_(i, j);
                if (aij != 0.0) f(j, aij, w_(i, j));
            }
        } else {
            for (std::size_t k = neighbours_.row_start[i]; k < neighbours_.row_start[i + 1]; ++k) {
                const std::size_t j = neighbours_.col[k];
                f(j, a_(i, j), w_(i, j));
            }
        }
    }

    std::size_t in_degree(std::size_t i) const {
        std::size_t d = 0;
        for_each_link(i, [&](std::size_t, double, double) { ++d; });
        return d;
    }

    bool operator==(const TransmissionNetwork& other) const {
        return kind_ == other.kind_ && a_ == other.a_ && w_ == other.w_ &&
               modulation_ == other.modulation_;
    }

private:
    void validate() {
        if (!a_.square() || a_.rows() == 0) throw ValidationError("a", "matrix must be square and non-empty");
        if (!w_.square()) throw ValidationError("w", "matrix is not square");
        if (w_.rows() != a_.rows()) throw ValidationError("w", "shape differs from a");
        const std::size_t n = a_.rows();
        integral_ = true;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double aij = a_(i, j);
                const double wij = w_(i, j);
                if (!std::isfinite(aij)) throw ValidationError(entry_name("a", i, j), "not finite");
                if (!(wij >= 0.0 && wij <= 1.0)) {
                    throw ValidationError(entry_name("w", i, j),
                                          "link probability " + std::to_string(wij) + " outside [0,1]");
                }
                if (aij != std::floor(aij)) integral_ = false;
                switch (kind_) {
                    case NetworkKind::EffectiveAdjacency:
                    case NetworkKind::SingleParticle:
                        if (aij != 0.0 && aij != 1.0) {
                            throw ValidationError(entry_name("a", i, j), "adjacency entry must be 0 or 1");
                        }
                        break;
                    case NetworkKind::MultiParticle:
                        if (aij < 0.0) throw ValidationError(entry_name("a", i, j), "particle count is negative");
                        break;
                    case NetworkKind::GeneralReal: break;
                }
            }
            if (is_epidemic(kind_) && !(a_(i, i) > 0.0)) {
                throw ValidationError(entry_name("a", i, i), "node " + std::to_string(i) + " lacks a self-loop");
            }
        }
    }

    void build_storage() {
        const std::size_t n = a_.rows();
        std::size_t zeros = 0;
        for (double v : a_.data()) zeros += (v == 0.0);
        const bool sparse = n > kDenseNodeLimit ||
                            static_cast<double>(zeros) > kSparseZeroFraction * static_cast<double>(a_.size());
        if (!sparse) return;
        neighbours_.row_start.assign(n + 1, 0);
        neighbours_.col.reserve(a_.size() - zeros);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (a_(i, j) != 0.0) neighbours_.col.push_back(j);
            }
            neighbours_.row_start[i + 1] = neighbours_.col.size();
        }
    }

    NetworkKind kind_ = NetworkKind::SingleParticle;
    Matrix a_;
    Matrix w_;
    std::optional<Modulation> modulation_;
    NeighbourLists neighbours_;
    bool integral_ = true;
};

}  // namespace transnn
