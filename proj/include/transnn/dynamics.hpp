#pragma once

// Discrete-time spread dynamics on transmission networks, in the probability
// representation p and the negative-log-negative representation
// s = -log(1 - p). Both are exact reformulations of each other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "transnn/activations.hpp"
#include "transnn/network.hpp"
#include "transnn/types.hpp"

namespace transnn {

enum class Representation { Probability, Info };

inline std::string_view to_string(Representation r) {
    return r == Representation::Probability ? "prob" : "info";
}

inline Representation parse_representation(std::string_view name) {
    if (name == "prob" || name == "probability") return Representation::Probability;
    if (name == "info") return Representation::Info;
    throw std::invalid_argument("unknown representation '" + std::string(name) + "'");
}

// Probability products with more factors than this are accumulated as sums
// of log1p terms.
inline constexpr std::size_t kLogSpaceFactorThreshold = 64;

namespace detail {

inline void require_kind(const TransmissionNetwork& net, NetworkKind kind, std::string_view op) {
    if (net.kind() != kind) {
        throw std::invalid_argument(std::string(op) + ": network kind is '" +
                                    std::string(to_string(net.kind())) + "', expected '" +
                                    std::string(to_string(kind)) + "'");
    }
}

inline void require_size(const TransmissionNetwork& net, std::size_t n, std::string_view op) {
    if (net.size() != n) throw std::invalid_argument(std::string(op) + ": state length != node count");
}

// 1 - prod_j (1 - w_ij p_j)^{a_ij}, with exponent 1 when `powered` is false.
inline ProbabilityState prob_step(const TransmissionNetwork& net, const ProbabilityState& p, bool powered) {
    const std::size_t n = net.size();
    Vector next(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (net.in_degree(i) > kLogSpaceFactorThreshold) {
            double log_healthy = 0.0;
            net.for_each_link(i, [&](std::size_t j, double aij, double wij) {
                log_healthy += (powered ? aij : 1.0) * std::log1p(-wij * p[j]);
            });
            next[i] = -std::expm1(log_healthy);
        } else {
            double healthy = 1.0;
            net.for_each_link(i, [&](std::size_t j, double aij, double wij) {
                const double factor = 1.0 - wij * p[j];
                healthy *= powered ? std::pow(factor, aij) : factor;
            });
            next[i] = 1.0 - healthy;
        }
        // rounding can leave -0 or values a hair outside [0,1]
        next[i] = std::clamp(next[i], 0.0, 1.0);
    }
    return ProbabilityState(std::move(next));
}

// sum_j a_ij psi(w_ij, s_j); links with a_ij = 0 contribute nothing even when
// s_j = +inf.
inline Vector info_step(const TransmissionNetwork& net, std::span<const double> s) {
    const std::size_t n = net.size();
    Vector next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        net.for_each_link(i, [&](std::size_t j, double aij, double wij) {
            const double out = psi(wij, s[j]);
            if (out != 0.0) acc += aij * out;
        });
        next[i] = acc;
    }
    return next;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Effective transmission networks: s(k+1) = A s(k)

inline InfoState step_effective_info(const TransmissionNetwork& net, const InfoState& s) {
    detail::require_kind(net, NetworkKind::EffectiveAdjacency, "step_effective_info");
    detail::require_size(net, s.size(), "step_effective_info");
    Vector next(net.size(), 0.0);
    for (std::size_t i = 0; i < net.size(); ++i) {
        double acc = 0.0;
        net.for_each_link(i, [&](std::size_t j, double aij, double) { acc += aij * s[j]; });
        next[i] = acc;
    }
    return InfoState(std::move(next));
}

/// p(k) = 1 - exp(-A^k s(0)), by k applications of step_effective_info.
inline ProbabilityState predict_effective_prob(const TransmissionNetwork& net, const ProbabilityState& p,
                                               std::size_t k) {
    detail::require_kind(net, NetworkKind::EffectiveAdjacency, "predict_effective_prob");
    InfoState s = prob_to_info(p);
    for (std::size_t step = 0; step < k; ++step) s = step_effective_info(net, s);
    return info_to_prob(s);
}

// ---------------------------------------------------------------------------
// Single-particle transmissions

/// 1 - p_i(k+1) = prod_{j: a_ij != 0} (1 - w_ij p_j(k)).
inline ProbabilityState step_single_prob(const TransmissionNetwork& net, const ProbabilityState& p) {
    detail::require_kind(net, NetworkKind::SingleParticle, "step_single_prob");
    detail::require_size(net, p.size(), "step_single_prob");
    return detail::prob_step(net, p, false);
}

/// s_i(k+1) = sum_j a_ij psi(w_ij, s_j(k)).
inline InfoState step_single_info(const TransmissionNetwork& net, const InfoState& s) {
    detail::require_kind(net, NetworkKind::SingleParticle, "step_single_info");
    detail::require_size(net, s.size(), "step_single_info");
    return InfoState(detail::info_step(net, s.values()));
}

// ---------------------------------------------------------------------------
// Multi-particle transmissions: a_hq independent particles per link

inline ProbabilityState step_multi_prob(const TransmissionNetwork& net, const ProbabilityState& p) {
    detail::require_kind(net, NetworkKind::MultiParticle, "step_multi_prob");
    detail::require_size(net, p.size(), "step_multi_prob");
    return detail::prob_step(net, p, true);
}

inline InfoState step_multi_info(const TransmissionNetwork& net, const InfoState& s) {
    detail::require_kind(net, NetworkKind::MultiParticle, "step_multi_info");
    detail::require_size(net, s.size(), "step_multi_info");
    return InfoState(detail::info_step(net, s.values()));
}

// ---------------------------------------------------------------------------
// General layer-dependent form with real weights and unrestricted states

/// One layer of a general transmission neural network: out_i = sum_j a_ij f(w_ij, s_j).
/// `a` is (outputs x inputs); `w` has the same shape with entries in [0,1].
struct TransLayer {
    Matrix a;
    Matrix w;
};

inline Vector step_general_info(const TransLayer& layer, std::span<const double> s,
                                ActivationKind kind = ActivationKind::TLogSigmoid) {
    if (layer.a.cols() != s.size() || layer.w.rows() != layer.a.rows() || layer.w.cols() != layer.a.cols()) {
        throw std::invalid_argument("step_general_info: shape mismatch");
    }
    Vector next(layer.a.rows(), 0.0);
    for (std::size_t i = 0; i < layer.a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double aij = layer.a(i, j);
            if (aij == 0.0) continue;
            acc += aij * activate(kind, layer.w(i, j), s[j]);
        }
        next[i] = acc;
    }
    return next;
}

/// Applies layer k of a layer sequence.
inline Vector step_general_info(std::span<const TransLayer> layers, std::span<const double> s, std::size_t k,
                                ActivationKind kind = ActivationKind::TLogSigmoid) {
    if (k >= layers.size()) throw std::out_of_range("step_general_info: layer index out of range");
    return step_general_info(layers[k], s, kind);
}

// ---------------------------------------------------------------------------
// Trajectories

struct Trajectory {
    Representation representation = Representation::Probability;
    std::vector<Vector> states;  // horizon + 1 entries

    std::size_t horizon() const noexcept { return states.empty() ? 0 : states.size() - 1; }
    std::size_t nodes() const noexcept { return states.empty() ? 0 : states.front().size(); }

    /// State at step k expressed as probabilities.
    Vector probabilities(std::size_t k) const {
        if (representation == Representation::Probability) return states[k];
        Vector p(states[k].size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = info_to_prob(states[k][i]);
        return p;
    }

    Vector infos(std::size_t k) const {
        if (representation == Representation::Info) return states[k];
        Vector s(states[k].size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = prob_to_info(states[k][i]);
        return s;
    }
};

using InitialState = std::variant<ProbabilityState, InfoState>;

/// Called with (step, state); return false to stop early.
using StateCallback = std::function<bool(std::size_t, const Vector&)>;

namespace detail {

inline Vector to_representation(const InitialState& init, Representation repr) {
    if (const auto* p = std::get_if<ProbabilityState>(&init)) {
        return repr == Representation::Probability ? p->values() : prob_to_info(*p).values();
    }
    const auto& s = std::get<InfoState>(init);
    return repr == Representation::Info ? s.values() : info_to_prob(s).values();
}

// 1 - p_i(k+1) = prod_{j: a_ij = 1} (1 - p_j(k)).
inline Vector effective_prob_step(const TransmissionNetwork& net, const Vector& p) {
    Vector next(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
        double healthy = 1.0;
        net.for_each_link(i, [&](std::size_t j, double, double) { healthy *= 1.0 - p[j]; });
        next[i] = std::clamp(1.0 - healthy, 0.0, 1.0);
    }
    return next;
}

inline Vector advance(const TransmissionNetwork& net, const Vector& state, Representation repr) {
    switch (net.kind()) {
        case NetworkKind::EffectiveAdjacency:
            if (repr == Representation::Info) return step_effective_info(net, InfoState(state)).values();
            return effective_prob_step(net, state);
        case NetworkKind::SingleParticle:
            if (repr == Representation::Info) return step_single_info(net, InfoState(state)).values();
            return step_single_prob(net, ProbabilityState(state)).values();
        case NetworkKind::MultiParticle:
            if (repr == Representation::Info) return step_multi_info(net, InfoState(state)).values();
            return step_multi_prob(net, ProbabilityState(state)).values();
        case NetworkKind::GeneralReal:
            if (repr == Representation::Info) return info_step(net, state);
            for (double a : net.a().data()) {
                if (a < 0.0) {
                    throw DomainError("probability-space step requires nonnegative weights; use the info representation");
                }
            }
            return prob_step(net, ProbabilityState(state), true).values();
    }
    return state;
}

}  // namespace detail

/// Iterates the step operation matching the network kind without storing the
/// trajectory; suited to very long horizons.
inline void simulate_streaming(const TransmissionNetwork& net, const InitialState& initial, std::size_t horizon,
                               Representation repr, const StateCallback& on_state) {
    Vector state = detail::to_representation(initial, repr);
    detail::require_size(net, state.size(), "simulate");
    if (!on_state(0, state)) return;
    for (std::size_t k = 1; k <= horizon; ++k) {
        state = detail::advance(net, state, repr);
        if (!on_state(k, state)) return;
    }
}

inline Trajectory simulate(const TransmissionNetwork& net, const InitialState& initial, std::size_t horizon,
                           Representation repr) {
    Trajectory traj;
    traj.representation = repr;
    traj.states.reserve(horizon + 1);
    simulate_streaming(net, initial, horizon, repr, [&](std::size_t, const Vector& s) {
        traj.states.push_back(s);
        return true;
    });
    return traj;
}

// ---------------------------------------------------------------------------
// Export

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "step,node,p,s\n";
    out << std::setprecision(17);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const Vector p = traj.probabilities(k);
        const Vector s = traj.infos(k);
        for (std::size_t i = 0; i < p.size(); ++i) {
            out << k << ',' << i << ',' << p[i] << ',' << s[i] << '\n';
        }
    }
}

inline nlohmann::json trajectory_to_json(const Trajectory& traj) {
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        nlohmann::json s = nlohmann::json::array();
        for (double v : traj.infos(k)) {
            // JSON has no infinity literal
            if (std::isinf(v)) s.push_back("inf");
            else s.push_back(v);
        }
        steps.push_back({{"step", k}, {"p", traj.probabilities(k)}, {"s", s}});
    }
    return {{"representation", to_string(traj.representation)},
            {"horizon", traj.horizon()},
            {"nodes", traj.nodes()},
            {"steps", steps}};
}

}  // namespace transnn
