#pragma once

// Spectral extinction analysis. If the spectral radius of A (.) W (Hadamard
// product) is strictly below one, the spread dies out from every initial
// condition. The condition is sufficient only: a radius >= 1 means "not
// guaranteed", never "the epidemic persists".

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "transnn/network.hpp"
#include "transnn/types.hpp"

namespace transnn {

enum class SpectralMethod { PowerIteration, DenseEigen };

inline std::string_view to_string(SpectralMethod m) {
    return m == SpectralMethod::PowerIteration ? "power_iteration" : "dense_eigen";
}

struct SpectralOptions {
    double tolerance = 1e-12;
    std::size_t max_iterations = 200000;
    // matrices up to this size are cross-checked against a dense eigensolver
    std::size_t dense_check_limit = 64;
    // unconverged power iterations fall back to the dense solver up to this size
    std::size_t dense_fallback_limit = kDenseNodeLimit;
};

struct SpectralResult {
    double radius = 0.0;
    SpectralMethod method = SpectralMethod::PowerIteration;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::optional<double> dense_radius;  // set when cross-checked
};

inline Matrix hadamard(const Matrix& a, const Matrix& w) {
    if (a.rows() != w.rows() || a.cols() != w.cols()) {
        throw std::invalid_argument("hadamard: shape mismatch");
    }
    Matrix out(a.rows(), a.cols());
    for (std::size_t k = 0; k < a.size(); ++k) out.data()[k] = a.data()[k] * w.data()[k];
    return out;
}

/// max |lambda_i| from a general (non-symmetric) dense eigendecomposition.
inline double dense_spectral_radius(const Matrix& m) {
    if (!m.square()) throw std::invalid_argument("dense_spectral_radius: matrix is not square");
    if (m.rows() == 0) return 0.0;
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
        m.data().data(), n, n);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(view, false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

inline double max_row_sum(const Matrix& m) {
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

// Shifted power iteration on M + cI for entrywise nonnegative M. The shift
// makes the Perron root strictly dominant, and the iterate stays positive so
// the Collatz-Wielandt quotients bracket rho(M) + c.
inline SpectralResult nonnegative_power_iteration(const Matrix& m, const SpectralOptions& opt) {
    const std::size_t n = m.rows();
    SpectralResult res;
    const double norm = max_row_sum(m);
    if (norm == 0.0) {
        res.converged = true;
        return res;
    }
    const double shift = 0.5 * norm;
    Vector x(n, 1.0), y(n);
    double lambda_prev = 0.0;
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        double lo = kInfinity, hi = 0.0, ymax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = shift * x[i];
            const auto r = m.row(i);
            for (std::size_t j = 0; j < n; ++j) acc += r[j] * x[j];
            y[i] = acc;
            const double q = acc / x[i];
            lo = std::min(lo, q);
            hi = std::max(hi, q);
            ymax = std::max(ymax, acc);
        }
        // x is normalised to max-norm 1, so ymax estimates rho + shift
        const double lambda = ymax;
        double resid = 0.0;
        for (std::size_t i = 0; i < n; ++i) resid = std::max(resid, std::abs(y[i] - lambda * x[i]));
        resid /= lambda;
        res.iterations = it;
        if (hi - lo <= opt.tolerance * hi) {
            res.radius = std::max(0.0, 0.5 * (lo + hi) - shift);
            res.residual = (hi - lo) / hi;
            res.converged = true;
            return res;
        }
        if (resid <= opt.tolerance && std::abs(lambda - lambda_prev) <= opt.tolerance * lambda) {
            res.radius = std::max(0.0, lambda - shift);
            res.residual = resid;
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / ymax;
        lambda_prev = lambda;
        res.radius = std::max(0.0, lambda - shift);
        res.residual = resid;
    }
    return res;
}

// Power iteration on |lambda| for general real matrices: the radius is the
// geometric mean growth of ||M^k x|| over a trailing window, which also
// averages out the rotation of a dominant complex pair.
inline SpectralResult general_power_iteration(const Matrix& m, const SpectralOptions& opt) {
    constexpr std::size_t kWindow = 64;
    const std::size_t n = m.rows();
    SpectralResult res;
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    std::vector<double> log_growth;
    double prev_estimate = -1.0;
    for (std::size_t it = 1; it <= opt.max_iterations; ++it) {
        Vector y = multiply(m, x);
        double norm = 0.0;
        for (double v : y) norm = std::max(norm, std::abs(v));
        res.iterations = it;
        if (norm == 0.0) {
            res.radius = 0.0;
            res.converged = true;
            return res;
        }
        log_growth.push_back(std::log(norm));
        for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
        if (log_growth.size() % kWindow == 0) {
            double mean = 0.0;
            for (std::size_t k = log_growth.size() - kWindow; k < log_growth.size(); ++k) mean += log_growth[k];
            const double estimate = std::exp(mean / static_cast<double>(kWindow));
            res.radius = estimate;
            res.residual = prev_estimate < 0.0 ? kInfinity : std::abs(estimate - prev_estimate) / estimate;
            if (res.residual <= opt.tolerance) {
                res.converged = true;
                return res;
            }
            prev_estimate = estimate;
        }
    }
    return res;
}

}  // namespace detail

/// Spectral radius max_i |lambda_i(m)|. Nonnegative matrices use shifted power
/// iteration; matrices up to `dense_check_limit` are also solved densely and
/// an unconverged iteration falls back to the dense value when allowed.
inline SpectralResult spectral_radius(const Matrix& m, const SpectralOptions& opt = {}) {
    if (!m.square()) throw std::invalid_argument("spectral_radius: matrix is not square");
    if (!(opt.tolerance > 0.0)) throw std::invalid_argument("spectral_radius: tolerance must be positive");
    if (m.rows() == 0) return SpectralResult{0.0, SpectralMethod::PowerIteration, 0, 0.0, true, std::nullopt};
    const bool nonnegative = std::all_of(m.data().begin(), m.data().end(), [](double v) { return v >= 0.0; });
    SpectralResult res = nonnegative ? detail::nonnegative_power_iteration(m, opt)
                                     : detail::general_power_iteration(m, opt);
    const std::size_t n = m.rows();
    if (n <= opt.dense_check_limit || (!res.converged && n <= opt.dense_fallback_limit)) {
        res.dense_radius = dense_spectral_radius(m);
        if (!res.converged) {
            res.radius = *res.dense_radius;
            res.method = SpectralMethod::DenseEigen;
            res.residual = 0.0;
            res.converged = true;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------

enum class Verdict { Guaranteed, NotGuaranteed, Indeterminate };

inline constexpr double kBoundaryTolerance = 1e-9;

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Guaranteed: return "extinction guaranteed";
        case Verdict::NotGuaranteed: return "extinction not guaranteed";
        case Verdict::Indeterminate: return "indeterminate at tolerance";
    }
    return "";
}

struct ThresholdReport {
    double spectral_radius = 0.0;
    bool extinction_guaranteed = false;
    Verdict verdict = Verdict::NotGuaranteed;
    SpectralMethod method = SpectralMethod::PowerIteration;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::optional<double> dense_radius;
};

inline Verdict classify_radius(double radius) {
    if (std::abs(radius - 1.0) < kBoundaryTolerance) return Verdict::Indeterminate;
    return radius < 1.0 ? Verdict::Guaranteed : Verdict::NotGuaranteed;
}

/// Spectral radius of A (.) W and the resulting sufficient-condition verdict.
/// Applies to single- and multi-particle networks alike.
inline ThresholdReport extinction_check(const TransmissionNetwork& net, const SpectralOptions& opt = {}) {
    const SpectralResult sr = spectral_radius(hadamard(net.a(), net.w()), opt);
    ThresholdReport rep;
    rep.spectral_radius = sr.radius;
    rep.method = sr.method;
    rep.iterations = sr.iterations;
    rep.residual = sr.residual;
    rep.converged = sr.converged;
    rep.dense_radius = sr.dense_radius;
    rep.verdict = sr.converged ? classify_radius(sr.radius) : Verdict::Indeterminate;
    rep.extinction_guaranteed = sr.converged && rep.verdict == Verdict::Guaranteed;
    return rep;
}

inline nlohmann::json to_json(const ThresholdReport& r) {
    nlohmann::json j{{"spectral_radius", r.spectral_radius},
                     {"extinction_guaranteed", r.extinction_guaranteed},
                     {"verdict", to_string(r.verdict)},
                     {"method", to_string(r.method)},
                     {"iterations", r.iterations},
                     {"residual", r.residual},
                     {"converged", r.converged}};
    if (r.dense_radius) j["dense_radius"] = *r.dense_radius;
    return j;
}

// ---------------------------------------------------------------------------
// Homogeneous special case: w_ii = 1 - delta, w_ij = beta on every edge.

namespace detail {

inline void validate_simple_graph(const Matrix& adj) {
    if (!adj.square()) throw ValidationError("adjacency", "matrix is not square");
    for (std::size_t i = 0; i < adj.rows(); ++i) {
        if (adj(i, i) != 0.0) throw ValidationError(entry_name("adjacency", i, i), "self-loop not allowed");
        for (std::size_t j = 0; j < adj.cols(); ++j) {
            if (adj(i, j) != 0.0 && adj(i, j) != 1.0) throw ValidationError(entry_name("adjacency", i, j), "not 0/1");
            if (adj(i, j) != adj(j, i)) throw ValidationError(entry_name("adjacency", i, j), "not symmetric");
        }
    }
}

}  // namespace detail

/// Largest eigenvalue of a symmetric adjacency matrix.
inline double largest_eigenvalue_symmetric(const Matrix& adj) {
    if (adj.rows() == 0) return 0.0;
    const auto n = static_cast<Eigen::Index>(adj.rows());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
        adj.data().data(), n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(view, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().maxCoeff();
}

/// lambda_max(adjacency without self-loops) < delta / beta.
inline bool homogeneous_threshold(const Matrix& adj_no_selfloops, double delta, double beta) {
    detail::validate_simple_graph(adj_no_selfloops);
    if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
    if (!(beta >= 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
    if (beta == 0.0) return true;
    return largest_eigenvalue_symmetric(adj_no_selfloops) < delta / beta;
}

/// Single-particle network with self-loops added, w_ii = 1 - delta, w_ij = beta.
inline TransmissionNetwork homogeneous_network(const Matrix& adj_no_selfloops, double delta, double beta) {
    detail::validate_simple_graph(adj_no_selfloops);
    const std::size_t n = adj_no_selfloops.rows();
    Matrix a = adj_no_selfloops;
    Matrix w(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, i) = 1.0;
        for (std::size_t j = 0; j < n; ++j) w(i, j) = (i == j) ? 1.0 - delta : (a(i, j) != 0.0 ? beta : 0.0);
    }
    return TransmissionNetwork(NetworkKind::SingleParticle, std::move(a), std::move(w));
}

}  // namespace transnn
