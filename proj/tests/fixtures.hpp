#pragma once

// Random instance generators shared by the unit tests and the acceptance
// suite.

#include <cstddef>
#include <random>

#include "transnn/network.hpp"

namespace fixtures {

using transnn::Matrix;
using transnn::NetworkKind;
using transnn::ProbabilityState;
using transnn::TransmissionNetwork;
using transnn::Vector;

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random epidemic network: self-loops everywhere, off-diagonal links with
/// probability `density`, link probabilities uniform in [0, w_max].
inline TransmissionNetwork random_network(std::mt19937_64& rng, std::size_t n, NetworkKind kind,
                                          double density = 0.3, double w_max = 1.0) {
    Matrix a(n, n), w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const bool link = i == j || uniform(rng) < density;
            if (!link) continue;
            if (kind == NetworkKind::MultiParticle) a(i, j) = std::floor(uniform(rng, 1.0, 4.0));
            else a(i, j) = 1.0;
            w(i, j) = uniform(rng, 0.0, w_max);
        }
    }
    return TransmissionNetwork(kind, std::move(a), std::move(w));
}

inline ProbabilityState random_state(std::mt19937_64& rng, std::size_t n) {
    Vector p(n);
    for (double& v : p) v = uniform(rng);
    return ProbabilityState(std::move(p));
}

/// Symmetric 0/1 adjacency with empty diagonal.
inline Matrix random_symmetric_graph(std::mt19937_64& rng, std::size_t n, double density) {
    Matrix adj(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (uniform(rng) < density) adj(i, j) = adj(j, i) = 1.0;
    return adj;
}

}  // namespace fixtures
